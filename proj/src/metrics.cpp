#include "metrics.hpp"

#include <map>
#include <stdexcept>

namespace uwjsa::metrics {

double spatial_reuse_index(const world::SlotOutcome& outcome) {
    if (outcome.pairs.empty()) {
        throw std::invalid_argument("spatial_reuse_index: no designated pairs");
    }
    double received = 0.0;
    for (const auto& p : outcome.pairs) {
        if (p.received) received += 1.0;
    }
    return received / static_cast<double>(outcome.pairs.size());
}

double fairness_index(std::span<const world::SlotOutcome> window, int n_senders) {
    if (n_senders < 1) throw std::invalid_argument("fairness_index: need senders");
    std::map<int, double> counts;
    for (const world::SlotOutcome& out : window) {
        for (const auto& p : out.pairs) {
            if (p.received) counts[p.tx_id] += 1.0;
        }
    }
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& [tx, x] : counts) {
        sum += x;
        sum_sq += x * x;
    }
    if (sum == 0.0) return 0.0;
    return (sum * sum) / (static_cast<double>(n_senders) * sum_sq);
}

double ineffective_index(const world::SlotOutcome& outcome) {
    double scheduled = 0.0, received = 0.0;
    for (const auto& p : outcome.pairs) {
        if (p.scheduled) {
            scheduled += 1.0;
            if (p.received) received += 1.0;
        }
    }
    if (scheduled == 0.0) return 0.0;
    return (received - scheduled) / scheduled;
}

double throughput(const EpisodeTrace& trace) {
    if (trace.lifetime_slots < 1) return 0.0;
    if (trace.lifetime_slots > static_cast<int>(trace.outcomes.size())) {
        throw std::invalid_argument("throughput: lifetime exceeds trace length");
    }
    double total = 0.0;
    for (int t = 0; t < trace.lifetime_slots; ++t) {
        for (const auto& p : trace.outcomes[static_cast<std::size_t>(t)].pairs) {
            if (trace.scenario == Scenario::kUnicast) {
                total += p.rate_bps * trace.t_tran_s;
            } else if (p.received) {
                total += 1.0;
            }
        }
    }
    return total / (trace.lifetime_slots * trace.t_slot_s);
}

double network_utility(const EpisodeTrace& trace, const UtilityWeights& w) {
    if (trace.lifetime_slots < 1) return 0.0;
    if (trace.lifetime_slots > static_cast<int>(trace.outcomes.size())) {
        throw std::invalid_argument("network_utility: lifetime exceeds trace length");
    }
    std::span<const world::SlotOutcome> life(trace.outcomes.data(),
                                             static_cast<std::size_t>(trace.lifetime_slots));
    double u_spa = 0.0, u_ief = 0.0;
    for (const world::SlotOutcome& out : life) {
        u_spa += spatial_reuse_index(out);
        u_ief += ineffective_index(out);
    }
    u_spa /= trace.lifetime_slots;
    u_ief /= trace.lifetime_slots;
    double u_fair = fairness_index(life, trace.n_senders);
    return w.alpha * u_spa + w.beta * u_fair + w.mu * u_ief;
}

double delivery_ratio(const EpisodeTrace& trace) {
    double scheduled = 0.0, received = 0.0;
    for (int t = 0; t < trace.lifetime_slots; ++t) {
        for (const auto& p : trace.outcomes[static_cast<std::size_t>(t)].pairs) {
            if (p.scheduled) {
                scheduled += 1.0;
                if (p.received) received += 1.0;
            }
        }
    }
    if (scheduled == 0.0) return 0.0;
    return received / scheduled;
}

EpisodeReport episode_report(const EpisodeTrace& trace, const UtilityWeights& w) {
    EpisodeReport rep;
    rep.lifetime_slots = trace.lifetime_slots;
    rep.utility = network_utility(trace, w);
    rep.throughput_value = throughput(trace);
    rep.delivery = delivery_ratio(trace);
    if (trace.lifetime_slots >= 1) {
        std::span<const world::SlotOutcome> life(trace.outcomes.data(),
                                                 static_cast<std::size_t>(trace.lifetime_slots));
        rep.fairness = fairness_index(life, trace.n_senders);
        double spa = 0.0;
        for (const world::SlotOutcome& out : life) spa += spatial_reuse_index(out);
        rep.spatial_reuse = spa / trace.lifetime_slots;
    }
    return rep;
}

} // namespace uwjsa::metrics
