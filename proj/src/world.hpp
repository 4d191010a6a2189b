#pragma once

#include "acoustics.hpp"
#include "rng.hpp"

#include <optional>
#include <string>
#include <vector>

namespace uwjsa::world {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
double distance(Vec3 a, Vec3 b);

enum class RoleKind { kTransmitter, kReceiver, kExternalInterferer };

struct NodeRole {
    RoleKind kind = RoleKind::kReceiver;
    std::vector<int> receiver_ids;   // transmitters: designated receivers, non-empty
    double interferer_power_w = 0.0; // external interferers only
};

struct NodeState {
    int id = 0;
    Vec3 position_m;
    double battery_j = 5000.0;
    double energy_used_j = 0.0;
    bool malfunction = false;
    std::optional<int> malfunction_onset_slot; // destiny drawn at episode start
    // Energy cease latch: once a node cannot afford a proposed transmission
    // without overdrawing the usable budget, its service is over for good.
    bool service_ended = false;
    int service_end_slot = 0; // slot at which service ended; delta_i = slot - 1
    NodeRole role;
};

struct MobilityConfig {
    double current_speed_mps = 0.3;
    double drift_direction_deg = 45.0;
    double jitter_std_mps = 0.05;
    double region_radius_m = 4000.0;
    double region_height_m = 1000.0;
};

struct WorldState {
    std::vector<NodeState> nodes;
    bool broadcast = false; // designated receiver sets are "all other nodes"
    int horizon_slots = 30;
    int resolved_slots = 0;
    // Straight entry/exit path of the external interferer for this episode.
    Vec3 interferer_entry, interferer_exit;

    const NodeState* find(int id) const;
    NodeState* find(int id);
};

// Fixed view of who sends to whom. Pair order is stable across slots so that
// per-slot outcomes line up for windowed metrics.
struct Topology {
    std::vector<int> sender_ids; // ascending
    std::vector<std::vector<int>> receivers_of;
    struct Pair {
        int tx_id = 0, rx_id = 0, sender_idx = 0;
    };
    std::vector<Pair> pairs; // every designated (tx, rx)
    int n_senders() const { return static_cast<int>(sender_ids.size()); }
};

Topology make_topology(const WorldState& state);

struct SlotOutcome {
    int slot = 0;
    std::vector<double> sent_power_w; // per Topology sender index, 0 = idle
    struct PairResult {
        int tx_id = 0, rx_id = 0;
        bool scheduled = false; // s_{i,~i}
        bool received = false;  // re_{i,~i}
        double tx_power_w = 0.0;
        double sinr = 0.0;
        double rate_bps = 0.0;
    };
    std::vector<PairResult> pairs; // aligned with Topology.pairs
};

// Largest designated transmitter-receiver distance (sets T_prop).
double max_designated_pair_distance(const WorldState& state, const Topology& topo);

// Drifts every underwater node by current * T_slot plus isotropic jitter,
// reflecting at the cylinder boundary; the external interferer advances along
// its straight path (at the boundary at slot 1 and slot horizon).
WorldState step_mobility(WorldState state, const MobilityConfig& cfg, double t_slot_s, Rng& rng);

Vec3 interferer_position(const WorldState& state, int slot);

// Episode-start draw: each underwater node is destined to malfunction with
// probability epsilon; onset slot uniform in [1, horizon].
void schedule_malfunctions(WorldState& state, double epsilon, Rng& rng);

// Applies onsets <= slot. Malfunction never clears.
void advance_malfunctions(WorldState& state, int slot);

// Resolves one slot: SINR per designated pair of each scheduled sender with
// all other concurrent senders plus external interferers as interference,
// reception iff gamma >= gamma_th, energy debit p * T_tran. The caller is
// responsible for constraining powers first (env module) and supplies the
// band noise (constant per channel); a debit that would exceed a battery or
// a unicast sender targeting a concurrent sender is a precondition violation.
struct ResolveResult {
    WorldState state;
    SlotOutcome outcome;
};
ResolveResult resolve_slot(WorldState state, const Topology& topo,
                           const std::vector<double>& sender_powers_w,
                           const acoustics::ChannelParams& ch, double ambient_noise_w,
                           double gamma_th_linear, double t_tran_s);

struct Lifetime {
    int slots = 0;
    bool degenerate = false; // no intelligent node left to define it
};

// delta_N = min over intelligent nodes of served slots; horizon if nobody
// ceased. Degenerate (all nodes malfunctioned) reports the horizon flagged.
Lifetime network_lifetime(const WorldState& final_state);

// Deployment file, schema version 1.
WorldState deployment_from_json(const std::string& json_text);
std::string deployment_to_json(const WorldState& state);
WorldState load_deployment(const std::string& path);

// Evenly spaced transmitters on a ring at the bottom of the cylinder,
// receivers at the top. Unicast pairs each transmitter with the receiver
// above it; broadcast designates every other underwater node.
WorldState make_ring_deployment(int n_senders, bool broadcast, double region_radius_m,
                                double region_height_m, double ring_fraction, double battery_j,
                                double interferer_power_w);

} // namespace uwjsa::world
