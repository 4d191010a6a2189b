#pragma once

#include "env.hpp"
#include "neural.hpp"
#include "policy.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uwjsa::marl {

// One stored episode: observation sequence per agent (including the final
// next-observation), executed action indices, per-slot team rewards, and the
// mask of agents that acted from their own policy. The last step of every
// stored episode is terminal (horizon reached or lifetime violated).
struct EpisodeRecord {
    int n_agents = 0;
    int obs_width = 0;
    int steps = 0;
    std::vector<float> obs;           // (steps+1) x agents x width
    std::vector<int> actions;         // steps x agents
    std::vector<std::uint8_t> active; // steps x agents
    std::vector<float> rewards;       // steps

    float observation(int t, int agent, int k) const {
        return obs[(static_cast<std::size_t>(t) * n_agents + agent) * obs_width + k];
    }
};

// Whole-episode ring buffer with a transition-count capacity. Sampling picks
// episodes with probability proportional to their length, which keeps the
// draw uniform over stored transitions while letting the recurrent state be
// rebuilt from each episode start.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity_transitions);

    void add(EpisodeRecord ep);
    std::size_t transitions() const { return total_; }
    std::size_t episodes() const { return episodes_.size(); }
    std::size_t capacity() const { return capacity_; }

    // Draws episodes until at least `min_transitions` transitions are covered.
    std::vector<const EpisodeRecord*> sample(std::size_t min_transitions, Rng& rng) const;

  private:
    std::deque<EpisodeRecord> episodes_;
    std::size_t total_ = 0;
    std::size_t capacity_;
};

// Summation mixer (one Q per agent in, team value out).
double mix(std::span<const double> q_selected);

// Epsilon-greedy over the forwarded Q-values; ties go to the lowest power.
int select_action(std::span<const float> q, double explore_eps, Rng& rng);

// TD targets for one episode under the target network: y = r on the terminal
// step, else r + discount * sum over next-step active agents of max_a Q.
std::vector<double> td_targets(const EpisodeRecord& ep, const neural::PolicyNet& target_net,
                               double discount);

struct TrainerConfig {
    int episodes = 5000;
    std::size_t buffer_capacity = 10000;
    int batch_transitions = 32;
    double learning_rate = 5e-4;
    double discount = 0.99;
    double explore_start = 1.0;
    double explore_end = 0.05;
    double explore_anneal_fraction = 0.5; // linear decline over this share of episodes
    int eval_period = 200;
    int eval_runs = 20;
    int target_update_period = 200;
};

double explore_epsilon(const TrainerConfig& cfg, int episode);

// Raised when the loss turns non-finite; carries a diagnostic dump.
struct TrainingDiverged : std::runtime_error {
    explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

struct Snapshot {
    int episode = 0;
    double malfunction_rate = 0.0;
    double mean_eval_reward = 0.0;
    double mean_eval_utility = 0.0;
    std::vector<float> params;
};

struct LogRow {
    int episode = 0;
    double malfunction_rate = 0.0;
    std::optional<double> mean_eval_reward; // latest evaluation, empty before the first
    std::optional<double> loss;             // empty during warm-up
    std::size_t buffer_fill = 0;
};

// Adjusts the malfunction rate from evaluation results (curriculum module).
class CurriculumHook {
  public:
    virtual ~CurriculumHook() = default;
    virtual double malfunction_rate() const = 0;
    virtual void on_evaluation(double mean_utility) = 0;
};

struct TrainResult {
    neural::Arch arch;
    std::vector<float> selected_params;
    int selected_episode = 0;
    std::vector<Snapshot> snapshots;
    std::vector<LogRow> log;
    double final_malfunction_rate = 0.0;
    double max_malfunction_rate = 0.0;
};

// Index of the chosen snapshot: among those taken at or after the first
// episode reaching the maximal training malfunction rate, the one with the
// highest mean evaluation reward (earliest on ties).
std::size_t select_final_model(const std::vector<Snapshot>& snapshots,
                               std::span<const double> epsilon_per_episode);

// Full training procedure: per-episode malfunction rate from the hook (or the
// fixed rate), epsilon-greedy rollouts, episodic replay, one gradient step
// per episode once the buffer holds a batch, periodic target sync, and
// periodic greedy evaluation with model snapshots.
TrainResult train(env::Environment& environment, const TrainerConfig& cfg, std::uint64_t seed,
                  double fixed_malfunction_rate, env::MalfunctionMode train_mode,
                  CurriculumHook* curriculum = nullptr);

// Mean accumulated reward and mean utility of greedy rollouts.
struct EvalSummary {
    double mean_reward = 0.0;
    double mean_utility = 0.0;
};
EvalSummary evaluate_greedy(env::Environment& environment, const neural::PolicyNet& net, int runs,
                            std::uint64_t seed, double malfunction_rate,
                            env::MalfunctionMode mode);

} // namespace uwjsa::marl
