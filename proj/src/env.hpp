#pragma once

#include "acoustics.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "world.hpp"

#include <cstdint>
#include <vector>

namespace uwjsa::env {

// One agent's partial view at the start of a slot.
struct Observation {
    world::Vec3 self_position;
    double residual_energy_ratio = 1.0;
    int last_send_flag = 0;
    double past_send_ratio = 0.0;
    double prev_power_w = 0.0;
    int node_id = 0;
    std::vector<world::Vec3> receiver_positions;
    std::vector<world::Vec3> interferer_positions; // other transmitters, then external entities
};

struct ActionSpace {
    std::vector<double> levels_w; // {0} followed by P, strictly increasing

    int size() const { return static_cast<int>(levels_w.size()); }
    double level(int idx) const { return levels_w[static_cast<std::size_t>(idx)]; }
    int index_of(double power_w) const;
    double max_power() const { return levels_w.back(); }
    static ActionSpace standard(); // {0, 2, 4, 8, 16, 32, 64} W
};

enum class MalfunctionMode { kSilent, kRandom };

struct RewardConfig {
    metrics::UtilityWeights weights;
    int fairness_window_h = 0; // 0 -> adaptive |N_send|
    int lifetime_requirement_slots = 30;
    double violation_penalty = -100.0;
};

struct EnvConfig {
    world::WorldState deployment; // template; batteries and positions reset per episode
    world::MobilityConfig mobility;
    acoustics::ChannelParams channel;
    double gamma_th_db = 10.0;
    ActionSpace actions = ActionSpace::standard();
    RewardConfig reward;
    double t_tran_s = 3.0;
    double t_guard_s = 0.1;
    double cease_fraction = 0.1; // transmission stops below this battery fraction
    metrics::Scenario scenario = metrics::Scenario::kUnicast;
};

struct StepResult {
    double reward = 0.0;
    bool terminal = false;
    bool lifetime_violated = false;
    std::vector<int> executed_actions; // index per agent after constraints
    std::vector<std::uint8_t> active;  // agent acted from its own policy this slot
};

// Dec-POMDP wrapper around the world. One instance drives one episode at a
// time; run several instances for parallel rollouts.
class Environment {
  public:
    explicit Environment(EnvConfig cfg);

    // Starts a fresh episode: full batteries, template positions, a new
    // interferer path and malfunction schedule. Returns slot-1 observations.
    const std::vector<Observation>& reset(std::uint64_t episode_seed, double malfunction_rate,
                                          MalfunctionMode mode);

    // Executes one slot from per-agent action indices.
    StepResult step(const std::vector<int>& action_indices);

    const std::vector<Observation>& observations() const { return observations_; }
    // Flat normalized encoding for the policy network.
    std::vector<double> observation_vector(int agent_idx) const;
    int observation_width() const;

    int n_agents() const { return topology_.n_senders(); }
    const world::Topology& topology() const { return topology_; }
    const world::WorldState& state() const { return state_; }
    const EnvConfig& config() const { return cfg_; }
    const ActionSpace& actions() const { return cfg_.actions; }
    double gamma_th_linear() const { return gamma_th_linear_; }
    double ambient_noise_w() const { return ambient_noise_w_; }
    double t_slot_s() const { return t_slot_s_; }
    int slot() const { return state_.resolved_slots; }
    bool done() const { return done_; }

    // Trace of the episode so far; lifetime is valid once the episode ended.
    metrics::EpisodeTrace trace() const;

    // Power after the malfunction and energy-budget constraints. Latches the
    // service-end state when a transmission would overdraw the usable budget.
    double constrain_action(world::NodeState& node, double proposed_w, MalfunctionMode mode,
                            int slot, Rng& rng) const;

  private:
    void build_observations();
    double team_reward() const;

    EnvConfig cfg_;
    world::Topology topology_;
    double gamma_th_linear_ = 10.0;
    double ambient_noise_w_ = 0.0;
    world::WorldState state_;
    double t_slot_s_ = 0.0;
    MalfunctionMode mode_ = MalfunctionMode::kSilent;
    Rng rng_{0};
    bool done_ = true;
    bool violated_ = false;
    std::vector<world::SlotOutcome> outcomes_;
    std::vector<Observation> observations_;
    std::vector<int> send_counts_;
    std::vector<int> last_send_;
    std::vector<double> prev_power_;
};

} // namespace uwjsa::env
