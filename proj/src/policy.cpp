#include "policy.hpp"

#include <stdexcept>

namespace uwjsa::policy {

int greedy_action(std::span<const float> q) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(q.size()); ++i) {
        if (q[static_cast<std::size_t>(i)] > q[static_cast<std::size_t>(best)]) best = i;
    }
    return best;
}

void NetPolicy::begin_episode(const env::Environment& e) {
    if (net_->arch().input != e.observation_width()) {
        throw std::invalid_argument("NetPolicy: network input width does not match scenario");
    }
    hidden_.assign(static_cast<std::size_t>(e.n_agents()) * net_->arch().hidden, 0.0f);
}

std::vector<int> NetPolicy::act(const env::Environment& e, Rng& rng) {
    (void)rng;
    int h = net_->arch().hidden;
    std::vector<int> actions(static_cast<std::size_t>(e.n_agents()));
    std::vector<float> q(static_cast<std::size_t>(net_->arch().actions));
    std::vector<float> obs(static_cast<std::size_t>(net_->arch().input));
    for (int i = 0; i < e.n_agents(); ++i) {
        std::vector<double> vec = e.observation_vector(i);
        for (std::size_t k = 0; k < vec.size(); ++k) obs[k] = static_cast<float>(vec[k]);
        std::span<float> hid(hidden_.data() + static_cast<std::size_t>(i) * h,
                             static_cast<std::size_t>(h));
        net_->forward_step(obs, hid, q);
        actions[static_cast<std::size_t>(i)] = greedy_action(q);
    }
    return actions;
}

Rollout run_episode(env::Environment& e, Policy& pi, std::uint64_t episode_seed,
                    double malfunction_rate, env::MalfunctionMode mode) {
    e.reset(episode_seed, malfunction_rate, mode);
    Rng policy_rng(derive_seed(episode_seed, 1));
    pi.begin_episode(e);
    Rollout out;
    while (!e.done()) {
        std::vector<int> actions = pi.act(e, policy_rng);
        env::StepResult res = e.step(actions);
        out.accumulated_reward += res.reward;
        out.lifetime_violated = out.lifetime_violated || res.lifetime_violated;
    }
    out.trace = e.trace();
    out.report = metrics::episode_report(out.trace, e.config().reward.weights);
    return out;
}

} // namespace uwjsa::policy
