#include "marl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace uwjsa::marl {

ReplayBuffer::ReplayBuffer(std::size_t capacity_transitions) : capacity_(capacity_transitions) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::add(EpisodeRecord ep) {
    if (static_cast<std::size_t>(ep.steps) > capacity_) {
        throw std::invalid_argument("ReplayBuffer: episode longer than buffer capacity");
    }
    total_ += static_cast<std::size_t>(ep.steps);
    episodes_.push_back(std::move(ep));
    while (total_ > capacity_) {
        total_ -= static_cast<std::size_t>(episodes_.front().steps);
        episodes_.pop_front();
    }
}

std::vector<const EpisodeRecord*> ReplayBuffer::sample(std::size_t min_transitions,
                                                       Rng& rng) const {
    if (total_ < min_transitions) {
        throw std::logic_error("ReplayBuffer: not enough transitions to sample");
    }
    std::vector<const EpisodeRecord*> out;
    std::size_t covered = 0;
    while (covered < min_transitions) {
        std::size_t k = rng.uniform_index(total_);
        for (const EpisodeRecord& ep : episodes_) {
            if (k < static_cast<std::size_t>(ep.steps)) {
                out.push_back(&ep);
                covered += static_cast<std::size_t>(ep.steps);
                break;
            }
            k -= static_cast<std::size_t>(ep.steps);
        }
    }
    return out;
}

double mix(std::span<const double> q_selected) {
    double total = 0.0;
    for (double q : q_selected) total += q;
    return total;
}

int select_action(std::span<const float> q, double explore_eps, Rng& rng) {
    if (rng.uniform() < explore_eps) {
        return static_cast<int>(rng.uniform_index(q.size()));
    }
    return policy::greedy_action(q);
}

double explore_epsilon(const TrainerConfig& cfg, int episode) {
    double anneal = std::max(1.0, cfg.explore_anneal_fraction * cfg.episodes);
    double frac = anneal > 1.0 ? std::min(1.0, (episode - 1) / (anneal - 1.0)) : 1.0;
    return cfg.explore_start + (cfg.explore_end - cfg.explore_start) * frac;
}

std::vector<double> td_targets(const EpisodeRecord& ep, const neural::PolicyNet& target_net,
                               double discount) {
    int agents = ep.n_agents, width = ep.obs_width, actions = target_net.arch().actions;
    std::vector<float> obs(static_cast<std::size_t>(ep.steps + 1) * agents * width);
    std::copy(ep.obs.begin(), ep.obs.end(), obs.begin());
    auto cache = target_net.forward_seq(std::move(obs), agents, ep.steps + 1);

    std::vector<double> y(static_cast<std::size_t>(ep.steps));
    for (int t = 0; t < ep.steps; ++t) {
        double target = ep.rewards[static_cast<std::size_t>(t)];
        if (t + 1 < ep.steps) { // non-terminal: bootstrap from next-step actives
            double boot = 0.0;
            for (int i = 0; i < agents; ++i) {
                if (!ep.active[static_cast<std::size_t>(t + 1) * agents + i]) continue;
                const float* q = cache.q.data() +
                                 (static_cast<std::size_t>(t + 1) * agents + i) * actions;
                float best = q[0];
                for (int a = 1; a < actions; ++a) best = std::max(best, q[a]);
                boot += best;
            }
            target += discount * boot;
        }
        y[static_cast<std::size_t>(t)] = target;
    }
    return y;
}

std::size_t select_final_model(const std::vector<Snapshot>& snapshots,
                               std::span<const double> epsilon_per_episode) {
    if (snapshots.empty()) throw std::invalid_argument("select_final_model: no snapshots");
    double max_eps = 0.0;
    for (double e : epsilon_per_episode) max_eps = std::max(max_eps, e);
    int epi_max = 1;
    for (std::size_t i = 0; i < epsilon_per_episode.size(); ++i) {
        if (epsilon_per_episode[i] == max_eps) {
            epi_max = static_cast<int>(i) + 1;
            break;
        }
    }
    std::size_t best = snapshots.size();
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        if (snapshots[i].episode < epi_max) continue;
        if (best == snapshots.size() ||
            snapshots[i].mean_eval_reward > snapshots[best].mean_eval_reward) {
            best = i;
        }
    }
    if (best == snapshots.size()) {
        // The rate rose after the last evaluation; fall back to the best overall.
        best = 0;
        for (std::size_t i = 1; i < snapshots.size(); ++i) {
            if (snapshots[i].mean_eval_reward > snapshots[best].mean_eval_reward) best = i;
        }
    }
    return best;
}

EvalSummary evaluate_greedy(env::Environment& environment, const neural::PolicyNet& net, int runs,
                            std::uint64_t seed, double malfunction_rate,
                            env::MalfunctionMode mode) {
    if (runs < 1) throw std::invalid_argument("evaluate_greedy: need at least one run");
    policy::NetPolicy pi(net);
    EvalSummary s;
    for (int run = 0; run < runs; ++run) {
        policy::Rollout r =
            policy::run_episode(environment, pi, derive_seed(seed, static_cast<std::uint64_t>(run)),
                                malfunction_rate, mode);
        s.mean_reward += r.accumulated_reward;
        s.mean_utility += r.report.utility;
    }
    s.mean_reward /= runs;
    s.mean_utility /= runs;
    return s;
}

namespace {

// One gradient step on the summed TD error over the sampled episodes.
double update_step(neural::PolicyNet& net, const neural::PolicyNet& target,
                   neural::AdamOptimizer<float>& opt,
                   const std::vector<const EpisodeRecord*>& batch, double discount) {
    const int agents = batch[0]->n_agents;
    const int width = batch[0]->obs_width;
    const int actions = net.arch().actions;
    const int rows = static_cast<int>(batch.size()) * agents;
    int t_max = 0;
    for (const EpisodeRecord* ep : batch) t_max = std::max(t_max, ep->steps);

    auto row_of = [&](int e, int i) { return e * agents + i; };

    std::vector<float> obs_eval(static_cast<std::size_t>(t_max) * rows * width, 0.0f);
    std::vector<float> obs_tgt(static_cast<std::size_t>(t_max + 1) * rows * width, 0.0f);
    for (std::size_t e = 0; e < batch.size(); ++e) {
        const EpisodeRecord* ep = batch[e];
        for (int t = 0; t <= ep->steps; ++t) {
            const float* src = ep->obs.data() + static_cast<std::size_t>(t) * agents * width;
            float* dst_tgt = obs_tgt.data() +
                             (static_cast<std::size_t>(t) * rows + row_of(static_cast<int>(e), 0)) *
                                 width;
            std::copy(src, src + static_cast<std::size_t>(agents) * width, dst_tgt);
            if (t < ep->steps) {
                float* dst_eval =
                    obs_eval.data() +
                    (static_cast<std::size_t>(t) * rows + row_of(static_cast<int>(e), 0)) * width;
                std::copy(src, src + static_cast<std::size_t>(agents) * width, dst_eval);
            }
        }
    }

    auto cache = net.forward_seq(std::move(obs_eval), rows, t_max);
    auto cache_tgt = target.forward_seq(std::move(obs_tgt), rows, t_max + 1);

    std::vector<float> dq(cache.q.size(), 0.0f);
    double loss = 0.0;
    for (std::size_t e = 0; e < batch.size(); ++e) {
        const EpisodeRecord* ep = batch[e];
        for (int t = 0; t < ep->steps; ++t) {
            double q_tot = 0.0;
            bool any_active = false;
            for (int i = 0; i < agents; ++i) {
                if (!ep->active[static_cast<std::size_t>(t) * agents + i]) continue;
                any_active = true;
                int a = ep->actions[static_cast<std::size_t>(t) * agents + i];
                q_tot += cache.q[(static_cast<std::size_t>(t) * rows +
                                  row_of(static_cast<int>(e), i)) *
                                     actions +
                                 a];
            }
            if (!any_active) continue;

            double y = ep->rewards[static_cast<std::size_t>(t)];
            if (t + 1 < ep->steps) {
                double boot = 0.0;
                for (int i = 0; i < agents; ++i) {
                    if (!ep->active[static_cast<std::size_t>(t + 1) * agents + i]) continue;
                    const float* q = cache_tgt.q.data() +
                                     (static_cast<std::size_t>(t + 1) * rows +
                                      row_of(static_cast<int>(e), i)) *
                                         actions;
                    float best = q[0];
                    for (int a = 1; a < actions; ++a) best = std::max(best, q[a]);
                    boot += best;
                }
                y += discount * boot;
            }

            double err = y - q_tot;
            loss += err * err;
            float g = static_cast<float>(-2.0 * err);
            for (int i = 0; i < agents; ++i) {
                if (!ep->active[static_cast<std::size_t>(t) * agents + i]) continue;
                int a = ep->actions[static_cast<std::size_t>(t) * agents + i];
                dq[(static_cast<std::size_t>(t) * rows + row_of(static_cast<int>(e), i)) * actions +
                   a] = g;
            }
        }
    }

    std::vector<float> grad = net.backward_seq(cache, dq);
    opt.step(net.params(), grad);
    return loss;
}

} // namespace

TrainResult train(env::Environment& environment, const TrainerConfig& cfg, std::uint64_t seed,
                  double fixed_malfunction_rate, env::MalfunctionMode train_mode,
                  CurriculumHook* curriculum) {
    if (cfg.episodes < 1 || cfg.eval_period < 1 || cfg.eval_runs < 1 ||
        cfg.target_update_period < 1 || cfg.batch_transitions < 1) {
        throw std::invalid_argument("train: invalid trainer configuration");
    }
    const int agents = environment.n_agents();
    const int width = environment.observation_width();
    neural::Arch arch{width, 64, environment.actions().size()};

    Rng init_rng(derive_seed(seed, 0xA11CEull));
    neural::PolicyNet net = neural::PolicyNet::init(arch, init_rng);
    neural::PolicyNet target = net;
    neural::AdamOptimizer<float> opt(net.param_count(), cfg.learning_rate);
    ReplayBuffer buffer(cfg.buffer_capacity);
    Rng sample_rng(derive_seed(seed, 0xBEEFull));

    TrainResult result;
    result.arch = arch;
    std::vector<double> epsilon_per_episode;
    epsilon_per_episode.reserve(static_cast<std::size_t>(cfg.episodes));
    std::optional<double> latest_eval;

    std::vector<float> hidden;
    std::vector<float> q(static_cast<std::size_t>(arch.actions));
    std::vector<float> obs_f(static_cast<std::size_t>(width));

    for (int ep = 1; ep <= cfg.episodes; ++ep) {
        double rate = curriculum ? curriculum->malfunction_rate() : fixed_malfunction_rate;
        epsilon_per_episode.push_back(rate);
        result.max_malfunction_rate = std::max(result.max_malfunction_rate, rate);
        double explore = explore_epsilon(cfg, ep);

        std::uint64_t ep_seed = derive_seed(seed, 0x100000ull + static_cast<std::uint64_t>(ep));
        environment.reset(ep_seed, rate, train_mode);
        Rng policy_rng(derive_seed(ep_seed, 1));
        hidden.assign(static_cast<std::size_t>(agents) * arch.hidden, 0.0f);

        EpisodeRecord record;
        record.n_agents = agents;
        record.obs_width = width;
        auto append_obs = [&]() {
            for (int i = 0; i < agents; ++i) {
                std::vector<double> v = environment.observation_vector(i);
                for (double x : v) record.obs.push_back(static_cast<float>(x));
            }
        };
        append_obs();

        std::vector<int> actions(static_cast<std::size_t>(agents));
        while (!environment.done()) {
            for (int i = 0; i < agents; ++i) {
                std::vector<double> v = environment.observation_vector(i);
                for (std::size_t k = 0; k < v.size(); ++k) obs_f[k] = static_cast<float>(v[k]);
                std::span<float> hid(hidden.data() + static_cast<std::size_t>(i) * arch.hidden,
                                     static_cast<std::size_t>(arch.hidden));
                net.forward_step(obs_f, hid, q);
                actions[static_cast<std::size_t>(i)] = select_action(q, explore, policy_rng);
            }
            env::StepResult res = environment.step(actions);
            record.steps += 1;
            for (int i = 0; i < agents; ++i) {
                record.actions.push_back(res.executed_actions[static_cast<std::size_t>(i)]);
                record.active.push_back(res.active[static_cast<std::size_t>(i)]);
            }
            record.rewards.push_back(static_cast<float>(res.reward));
            append_obs();
        }
        buffer.add(std::move(record));

        std::optional<double> loss;
        if (buffer.transitions() >= static_cast<std::size_t>(cfg.batch_transitions)) {
            auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_transitions), sample_rng);
            double l = update_step(net, target, opt, batch, cfg.discount);
            if (!std::isfinite(l)) {
                std::ostringstream oss;
                oss << "training diverged: non-finite loss at episode " << ep
                    << " (malfunction_rate=" << rate << ", explore=" << explore
                    << ", buffer=" << buffer.transitions() << ")";
                throw TrainingDiverged(oss.str());
            }
            loss = l;
        }

        if (ep % cfg.target_update_period == 0) target = net;

        if (ep % cfg.eval_period == 0) {
            EvalSummary s = evaluate_greedy(
                environment, net, cfg.eval_runs,
                derive_seed(seed, 0x200000ull + static_cast<std::uint64_t>(ep)), rate, train_mode);
            latest_eval = s.mean_reward;
            result.snapshots.push_back({ep, rate, s.mean_reward, s.mean_utility, net.params()});
            if (curriculum) curriculum->on_evaluation(s.mean_utility);
        }

        result.log.push_back({ep, rate, latest_eval, loss, buffer.transitions()});
    }

    if (result.snapshots.empty()) {
        EvalSummary s = evaluate_greedy(environment, net, cfg.eval_runs,
                                        derive_seed(seed, 0x300000ull),
                                        epsilon_per_episode.back(), train_mode);
        result.snapshots.push_back({cfg.episodes, epsilon_per_episode.back(), s.mean_reward,
                                    s.mean_utility, net.params()});
    }

    std::size_t sel = select_final_model(result.snapshots, epsilon_per_episode);
    result.selected_params = result.snapshots[sel].params;
    result.selected_episode = result.snapshots[sel].episode;
    result.final_malfunction_rate = epsilon_per_episode.back();
    return result;
}

} // namespace uwjsa::marl
