#pragma once

#include "env.hpp"
#include "neural.hpp"
#include "rng.hpp"

#include <memory>
#include <vector>

namespace uwjsa::policy {

// Per-slot decision maker for every agent. One instance drives one episode at
// a time; begin_episode clears any per-episode state (hidden states, rotation).
class Policy {
  public:
    virtual ~Policy() = default;
    virtual void begin_episode(const env::Environment& e) { (void)e; }
    virtual std::vector<int> act(const env::Environment& e, Rng& rng) = 0;
};

// Greedy execution of a trained Q-network; each agent evolves its own hidden
// state from its local observations.
class NetPolicy : public Policy {
  public:
    explicit NetPolicy(const neural::PolicyNet& net) : net_(&net) {}

    void begin_episode(const env::Environment& e) override;
    std::vector<int> act(const env::Environment& e, Rng& rng) override;

  private:
    const neural::PolicyNet* net_;
    std::vector<float> hidden_; // agents x hidden
};

struct Rollout {
    double accumulated_reward = 0.0;
    bool lifetime_violated = false;
    metrics::EpisodeTrace trace;
    metrics::EpisodeReport report;
};

// Runs one full episode: reset with the derived seed, act until terminal.
Rollout run_episode(env::Environment& e, Policy& pi, std::uint64_t episode_seed,
                    double malfunction_rate, env::MalfunctionMode mode);

// Argmax with ties broken toward the lowest power level.
int greedy_action(std::span<const float> q);

} // namespace uwjsa::policy
