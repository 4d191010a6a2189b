#pragma once

#include "world.hpp"

#include <span>
#include <vector>

namespace uwjsa::metrics {

struct UtilityWeights {
    double alpha = 1.0, beta = 1.0, mu = 1.0;
};

enum class Scenario { kUnicast, kBroadcast };

struct EpisodeTrace {
    std::vector<world::SlotOutcome> outcomes;
    int lifetime_slots = 0; // delta_N <= outcomes.size()
    Scenario scenario = Scenario::kUnicast;
    double t_slot_s = 0.0;
    double t_tran_s = 0.0;
    int n_senders = 0;
};

// Fraction of designated receptions that succeeded this slot; the denominator
// counts every designated pair whether or not its sender was scheduled.
double spatial_reuse_index(const world::SlotOutcome& outcome);

// Jain's index over per-transmitter delivery counts across the window;
// 0 when there were no successful communications at all.
double fairness_index(std::span<const world::SlotOutcome> window, int n_senders);

// (sum re - sum s) / sum s over scheduled pairs, in [-1, 0]; 0 when nothing
// was scheduled (no energy was wasted).
double ineffective_index(const world::SlotOutcome& outcome);

// Unicast: delivered bits per second of lifetime. Broadcast: successful
// deliveries per second of lifetime.
double throughput(const EpisodeTrace& trace);

// alpha * U_spa + beta * U_fair + mu * U_ief over the lifetime.
double network_utility(const EpisodeTrace& trace, const UtilityWeights& w);

// Successful receptions over scheduled transmissions across the lifetime;
// 0 when nothing was ever scheduled.
double delivery_ratio(const EpisodeTrace& trace);

struct EpisodeReport {
    double utility = 0.0;
    double throughput_value = 0.0;
    double fairness = 0.0;
    double delivery = 0.0;
    double spatial_reuse = 0.0;
    int lifetime_slots = 0;
};

EpisodeReport episode_report(const EpisodeTrace& trace, const UtilityWeights& w);

} // namespace uwjsa::metrics
