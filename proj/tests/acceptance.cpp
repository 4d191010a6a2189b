// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavy criteria train real models at desk scale; run with
// --only N[,M...] to execute a subset.

#include "baselines.hpp"
#include "config.hpp"
#include "curriculum.hpp"
#include "io.hpp"
#include "marl.hpp"
#include "runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

using namespace uwjsa;
namespace fs = std::filesystem;

namespace {

struct Failure {
    std::string detail;
};

int g_checks = 0;

void require(bool ok, const std::string& detail) {
    ++g_checks;
    if (!ok) throw Failure{detail};
}

double rel_err(double got, double want) {
    double scale = std::max({std::abs(got), std::abs(want), 1e-300});
    return std::abs(got - want) / scale;
}

// ---------------------------------------------------------------------------
// Criterion 1: formula oracles, straight-line reimplementations, rel err 1e-9.
// ---------------------------------------------------------------------------

double ref_thorp(double f) {
    double f2 = f * f;
    return 0.11 * f2 / (1 + f2) + 44 * f2 / (4100 + f2) + 2.75e-4 * f2 + 0.003;
}

double ref_attenuation(double d_m, double f_khz, double k, double a0) {
    return a0 * std::pow(d_m, k) * std::pow(10.0, ref_thorp(f_khz) * (d_m / 1000.0) / 10.0);
}

void criterion_formula_oracles() {
    Rng rng(0xC1);
    acoustics::ChannelParams ch;

    for (int i = 0; i < 1000; ++i) {
        double f = rng.uniform(0.5, 80.0);
        require(rel_err(acoustics::thorp_absorption_db_per_km(f), ref_thorp(f)) < 1e-9,
                "thorp mismatch");
    }

    for (int i = 0; i < 1000; ++i) {
        ch.carrier_freq_khz = rng.uniform(0.5, 40.0);
        ch.spreading_factor_k = rng.uniform(1.0, 2.0);
        ch.norm_const_a0 = rng.uniform(0.5, 2.0);
        double d = rng.uniform(1.0, 9000.0);
        require(rel_err(acoustics::attenuation({d}, ch),
                        ref_attenuation(d, ch.carrier_freq_khz, ch.spreading_factor_k,
                                        ch.norm_const_a0)) < 1e-9,
                "attenuation mismatch");
    }

    ch = acoustics::ChannelParams{};
    for (int i = 0; i < 1000; ++i) {
        double p = rng.uniform(0.0, 64.0);
        double d = rng.uniform(10.0, 8000.0);
        double eta = rng.uniform(0.3, 1.0);
        ch.transducer_eff = eta;
        int n_int = static_cast<int>(rng.uniform_index(4));
        std::vector<acoustics::Interferer> ifs;
        double denom_ref = 0.0;
        for (int j = 0; j < n_int; ++j) {
            double pj = rng.uniform(0.0, 64.0);
            double dj = rng.uniform(10.0, 8000.0);
            ifs.push_back({pj, {dj}});
            denom_ref += eta * pj / ref_attenuation(dj, ch.carrier_freq_khz,
                                                    ch.spreading_factor_k, ch.norm_const_a0);
        }
        double noise = rng.uniform(1e-12, 1e-6);
        double want =
            p == 0.0 ? 0.0
                     : eta * p /
                           ref_attenuation(d, ch.carrier_freq_khz, ch.spreading_factor_k,
                                           ch.norm_const_a0) /
                           (denom_ref + noise);
        require(rel_err(acoustics::sinr(p, {d}, ifs, ch, noise), want) < 1e-9, "sinr mismatch");
    }

    for (int i = 0; i < 1000; ++i) {
        double g = rng.uniform(0.0, 200.0);
        double th = rng.uniform(0.0, 20.0);
        double b = rng.uniform(100.0, 10000.0);
        ch.bandwidth_hz = b;
        double want = g >= th ? b * std::log2(1.0 + g) : 0.0;
        require(rel_err(acoustics::achievable_rate(g, ch, th), want) < 1e-9, "rate mismatch");
    }

    for (int i = 0; i < 1000; ++i) {
        double t = rng.uniform(0.1, 10.0), d = rng.uniform(0.0, 9000.0),
               guard = rng.uniform(0.0, 1.0), c = rng.uniform(1400.0, 1600.0);
        ch.sound_speed_mps = c;
        require(rel_err(acoustics::slot_duration(t, d, guard, ch), t + d / c + guard) < 1e-9,
                "slot duration mismatch");
    }

    // indices over random outcomes vs inline counting
    for (int i = 0; i < 1000; ++i) {
        int n = 1 + static_cast<int>(rng.uniform_index(8));
        world::SlotOutcome out;
        out.slot = 1;
        out.sent_power_w.assign(static_cast<std::size_t>(n), 0.0);
        double sum_s = 0, sum_re = 0;
        for (int k = 0; k < n; ++k) {
            world::SlotOutcome::PairResult p;
            p.tx_id = k + 1;
            p.rx_id = 100 + k;
            p.scheduled = rng.bernoulli(0.7);
            p.received = p.scheduled && rng.bernoulli(0.5);
            sum_s += p.scheduled;
            sum_re += p.received;
            out.pairs.push_back(p);
        }
        require(rel_err(metrics::spatial_reuse_index(out), sum_re / n) < 1e-9, "I_spa mismatch");
        double want_ief = sum_s == 0 ? 0.0 : (sum_re - sum_s) / sum_s;
        require(rel_err(metrics::ineffective_index(out), want_ief) < 1e-9, "I_ief mismatch");
    }

    // Jain fairness over random windows vs inline formula
    for (int i = 0; i < 1000; ++i) {
        int n = 2 + static_cast<int>(rng.uniform_index(6));
        int h = 1 + static_cast<int>(rng.uniform_index(6));
        std::vector<world::SlotOutcome> window;
        std::vector<double> counts(static_cast<std::size_t>(n), 0.0);
        for (int t = 0; t < h; ++t) {
            world::SlotOutcome out;
            out.slot = t + 1;
            for (int k = 0; k < n; ++k) {
                world::SlotOutcome::PairResult p;
                p.tx_id = k + 1;
                p.rx_id = 100 + k;
                p.scheduled = rng.bernoulli(0.7);
                p.received = p.scheduled && rng.bernoulli(0.5);
                counts[static_cast<std::size_t>(k)] += p.received ? 1.0 : 0.0;
                out.pairs.push_back(p);
            }
            window.push_back(out);
        }
        double sum = 0, sq = 0;
        for (double x : counts) {
            sum += x;
            sq += x * x;
        }
        double want = sum == 0 ? 0.0 : sum * sum / (n * sq);
        require(rel_err(metrics::fairness_index(window, n), want) < 1e-9, "I_fair mismatch");
    }

    // network utility combination over random traces
    for (int i = 0; i < 200; ++i) {
        int n = 2 + static_cast<int>(rng.uniform_index(4));
        int len = 3 + static_cast<int>(rng.uniform_index(20));
        metrics::EpisodeTrace tr;
        tr.n_senders = n;
        tr.lifetime_slots = len;
        tr.scenario = metrics::Scenario::kUnicast;
        tr.t_slot_s = 8.0;
        tr.t_tran_s = 3.0;
        std::vector<double> counts(static_cast<std::size_t>(n), 0.0);
        double spa = 0, ief = 0;
        for (int t = 0; t < len; ++t) {
            world::SlotOutcome out;
            out.slot = t + 1;
            double s = 0, re = 0;
            for (int k = 0; k < n; ++k) {
                world::SlotOutcome::PairResult p;
                p.tx_id = k + 1;
                p.rx_id = 100 + k;
                p.scheduled = rng.bernoulli(0.6);
                p.received = p.scheduled && rng.bernoulli(0.6);
                s += p.scheduled;
                re += p.received;
                counts[static_cast<std::size_t>(k)] += p.received ? 1.0 : 0.0;
                out.pairs.push_back(p);
            }
            spa += re / n;
            ief += s == 0 ? 0.0 : (re - s) / s;
            tr.outcomes.push_back(out);
        }
        double sum = 0, sq = 0;
        for (double x : counts) {
            sum += x;
            sq += x * x;
        }
        double fair = sum == 0 ? 0.0 : sum * sum / (n * sq);
        metrics::UtilityWeights w{rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0),
                                  rng.uniform(0.1, 2.0)};
        double want = w.alpha * spa / len + w.beta * fair + w.mu * ief / len;
        require(rel_err(metrics::network_utility(tr, w), want) < 1e-9, "utility mismatch");
    }

    // team reward vs inline recomposition over simulated episodes
    {
        env::EnvConfig ec;
        ec.deployment = world::make_ring_deployment(3, false, 4000, 1000, 0.6, 5000, 4.0);
        env::Environment e(ec);
        Rng act(0xC1A);
        int checked = 0;
        for (int ep = 0; checked < 1000; ++ep) {
            e.reset(derive_seed(0xC1B, static_cast<std::uint64_t>(ep)), 0.0,
                    env::MalfunctionMode::kSilent);
            while (!e.done()) {
                env::StepResult r = e.step({static_cast<int>(act.uniform_index(7)),
                                            static_cast<int>(act.uniform_index(7)),
                                            static_cast<int>(act.uniform_index(7))});
                metrics::EpisodeTrace tr = e.trace();
                const world::SlotOutcome& out = tr.outcomes.back();
                std::size_t h = std::min<std::size_t>(3, tr.outcomes.size());
                std::span<const world::SlotOutcome> win(
                    tr.outcomes.data() + (tr.outcomes.size() - h), h);
                double want = metrics::spatial_reuse_index(out) +
                              metrics::fairness_index(win, 3) -
                              (-metrics::ineffective_index(out));
                require(rel_err(r.reward, want) < 1e-9, "reward mismatch");
                ++checked;
            }
        }
    }

    // curriculum updates vs inline clamped geometric forms
    for (int i = 0; i < 1000; ++i) {
        curriculum::CurriculumState s;
        s.epsilon = rng.uniform(0.0, 0.6);
        s.u_th = rng.uniform(0.0, 2.0);
        s.gamma_lf = rng.uniform(0.001, 0.5);
        s.epsilon_max = 0.6;
        double u = rng.uniform(-1.0, 2.0);
        double want = u >= s.u_th
                          ? std::min(s.epsilon + s.gamma_lf * (1.0 - s.epsilon), s.epsilon_max)
                          : std::max(0.0, s.epsilon * (1.0 - s.gamma_lf));
        require(rel_err(curriculum::adjust_epsilon(s, u).epsilon, want) < 1e-9,
                "epsilon update mismatch");
    }
}

// ---------------------------------------------------------------------------
// Criterion 2: index bounds under fuzzing, 1e5 outcomes.
// ---------------------------------------------------------------------------

void criterion_index_bounds() {
    Rng rng(0xC2);
    for (int i = 0; i < 100000; ++i) {
        int n = 1 + static_cast<int>(rng.uniform_index(10));
        world::SlotOutcome out;
        out.slot = 1;
        for (int k = 0; k < n; ++k) {
            world::SlotOutcome::PairResult p;
            p.tx_id = k + 1;
            p.rx_id = 100 + k;
            p.scheduled = rng.bernoulli(0.5);
            p.received = p.scheduled && rng.bernoulli(0.5);
            out.pairs.push_back(p);
        }
        double spa = metrics::spatial_reuse_index(out);
        require(spa >= 0.0 && spa <= 1.0, "I_spa out of [0,1]");
        double ief = metrics::ineffective_index(out);
        require(ief >= -1.0 && ief <= 0.0, "I_ief out of [-1,0]");
        std::vector<world::SlotOutcome> win = {out};
        double fair = metrics::fairness_index(win, n);
        require(fair == 0.0 || (fair >= 1.0 / n - 1e-12 && fair <= 1.0 + 1e-12),
                "I_fair out of {0} u [1/N,1]");
        double reward = spa + fair - (-ief);
        require(reward >= -1.0 - 1e-9 && reward <= 2.0 + 1e-9, "reward out of [-mu, a+b]");
    }

    // rewards produced by the environment also stay in range (or -100)
    env::EnvConfig ec;
    ec.deployment = world::make_ring_deployment(3, false, 4000, 1000, 0.6, 5000, 4.0);
    env::Environment e(ec);
    Rng act(0xC2A);
    for (int ep = 0; ep < 200; ++ep) {
        e.reset(derive_seed(0xC2B, static_cast<std::uint64_t>(ep)), 0.4,
                env::MalfunctionMode::kRandom);
        while (!e.done()) {
            env::StepResult r = e.step({static_cast<int>(act.uniform_index(7)),
                                        static_cast<int>(act.uniform_index(7)),
                                        static_cast<int>(act.uniform_index(7))});
            bool ok = (r.reward >= -1.0 - 1e-9 && r.reward <= 2.0 + 1e-9) || r.reward == -100.0;
            require(ok, "environment reward out of range");
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 3: recurrent gradient vs central finite differences.
// ---------------------------------------------------------------------------

void criterion_gradient_check() {
    Rng rng(0xC3);
    const neural::Arch arch{7, 10, 7};
    const int rows = 2, steps = 6;
    const double fd_step = 1e-5;

    for (int draw = 0; draw < 100; ++draw) {
        neural::Net<double> net = neural::Net<double>::init(arch, rng);
        std::vector<double> obs(static_cast<std::size_t>(steps) * rows * arch.input);
        for (double& v : obs) v = rng.uniform(-1.0, 1.0);
        std::vector<double> coeff(static_cast<std::size_t>(steps) * rows * arch.actions);
        for (double& v : coeff) v = rng.uniform(-1.0, 1.0);

        auto cache = net.forward_seq(obs, rows, steps);
        std::vector<double> grad = net.backward_seq(cache, coeff);
        std::vector<double> base = net.params();

        auto loss_at = [&](const std::vector<double>& p) {
            auto c = neural::Net<double>::from_params(arch, p).forward_seq(obs, rows, steps);
            double total = 0.0;
            for (std::size_t i = 0; i < c.q.size(); ++i) total += coeff[i] * c.q[i];
            return total;
        };

        for (const neural::Slice& slice : net.slices()) {
            for (int probe = 0; probe < 2; ++probe) {
                std::size_t idx = slice.offset + rng.uniform_index(slice.count());
                std::vector<double> plus = base, minus = base;
                plus[idx] += fd_step;
                minus[idx] -= fd_step;
                double fd = (loss_at(plus) - loss_at(minus)) / (2.0 * fd_step);
                double scale = std::max({std::abs(fd), std::abs(grad[idx]), 1e-6});
                require(std::abs(grad[idx] - fd) / scale < 1e-4,
                        "gradient mismatch in slice " + slice.name);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 4: IGM by brute force over joint action tables.
// ---------------------------------------------------------------------------

void criterion_igm_brute_force() {
    Rng rng(0xC4);
    for (int trial = 0; trial < 1000; ++trial) {
        int agents = trial % 2 == 0 ? 2 : 3;
        std::vector<std::vector<float>> tables(static_cast<std::size_t>(agents),
                                               std::vector<float>(7));
        for (auto& tbl : tables) {
            for (float& v : tbl) v = static_cast<float>(rng.uniform(-10.0, 10.0));
        }
        std::vector<int> per_agent;
        for (const auto& tbl : tables) per_agent.push_back(policy::greedy_action(tbl));

        std::vector<int> joint(static_cast<std::size_t>(agents), 0), best_joint;
        double best = -1e300;
        while (true) {
            std::vector<double> picked;
            for (int i = 0; i < agents; ++i) {
                picked.push_back(
                    tables[static_cast<std::size_t>(i)]
                          [static_cast<std::size_t>(joint[static_cast<std::size_t>(i)])]);
            }
            double total = marl::mix(picked);
            if (total > best) {
                best = total;
                best_joint = joint;
            }
            int k = agents - 1;
            while (k >= 0 && ++joint[static_cast<std::size_t>(k)] == 7) {
                joint[static_cast<std::size_t>(k)] = 0;
                --k;
            }
            if (k < 0) break;
        }
        require(per_agent == best_joint, "per-agent argmax differs from joint argmax");
    }
}

// ---------------------------------------------------------------------------
// Criterion 5: energy and lifetime semantics, exact.
// ---------------------------------------------------------------------------

void criterion_energy_lifetime() {
    env::EnvConfig ec;
    ec.deployment = world::make_ring_deployment(2, false, 4000, 1000, 0.5, 5000, 0.0);
    ec.channel.ambient_noise.mode = acoustics::NoiseConfig::Mode::kConstantPower;
    ec.channel.ambient_noise.constant_power_w = 1e-10;
    ec.mobility.current_speed_mps = 0.0;
    ec.mobility.jitter_std_mps = 0.0;
    env::Environment e(ec);
    e.reset(1, 0.0, env::MalfunctionMode::kSilent);

    int steps = 0;
    double last_reward = 0.0;
    bool violated = false;
    while (!e.done()) {
        env::StepResult r = e.step({6, 6}); // 64 W every slot
        ++steps;
        if (steps == 1) {
            require(e.state().find(1)->energy_used_j == 192.0, "64 W x 3 s must debit 192 J");
        }
        last_reward = r.reward;
        violated = r.lifetime_violated;
    }
    require(steps == 24, "node must stop during slot 24");
    require(violated, "lifetime violation must be flagged");
    require(last_reward == -100.0, "violation reward must be exactly -100");
    require(e.trace().lifetime_slots == 23, "lifetime must be 23 full slots");
    require(e.state().find(1)->energy_used_j == 23 * 192.0, "ledger must be exact");

    // a sustainable policy survives the full horizon with an exact ledger
    env::Environment e2(ec);
    e2.reset(2, 0.0, env::MalfunctionMode::kSilent);
    int n = 0;
    while (!e2.done()) {
        e2.step({5, 5}); // 32 W -> 96 J per slot, 2880 J over 30 slots
        ++n;
    }
    require(n == 30, "sustainable policy must reach the horizon");
    require(e2.trace().lifetime_slots == 30, "full-horizon lifetime");
    require(e2.state().find(1)->energy_used_j == 30 * 96.0, "exact 32 W ledger");
}

// ---------------------------------------------------------------------------
// Criteria 6-8: desk-scale statistical checks (shared machinery).
// ---------------------------------------------------------------------------

config::RunConfig desk_config(int pairs, int episodes) {
    config::RunConfig cfg;
    cfg.scenario.n_pairs = pairs;
    cfg.trainer.episodes = episodes;
    return cfg;
}

double mean_eval_utility(const config::ScenarioConfig& sc, policy::Policy& pi, int episodes,
                         std::uint64_t seed, double rate, env::MalfunctionMode mode) {
    env::Environment e = config::make_environment(sc);
    double total = 0.0;
    for (int i = 0; i < episodes; ++i) {
        policy::Rollout r =
            policy::run_episode(e, pi, derive_seed(seed, static_cast<std::uint64_t>(i)), rate,
                                mode);
        total += r.report.utility;
    }
    return total / episodes;
}

double mean_eval_delivery(const config::ScenarioConfig& sc, policy::Policy& pi, int episodes,
                          std::uint64_t seed, double rate, env::MalfunctionMode mode) {
    env::Environment e = config::make_environment(sc);
    double total = 0.0;
    for (int i = 0; i < episodes; ++i) {
        policy::Rollout r =
            policy::run_episode(e, pi, derive_seed(seed, static_cast<std::uint64_t>(i)), rate,
                                mode);
        total += r.report.delivery;
    }
    return total / episodes;
}

template <class Fn>
void parallel_over_seeds(int n, Fn&& fn) {
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            int i = next.fetch_add(1);
            if (i >= n) break;
            fn(i);
        }
    };
    std::thread a(worker), b(worker);
    a.join();
    b.join();
}

void criterion_learning_sanity() {
    const int kSeeds = 10;
    config::RunConfig cfg = desk_config(3, 5000);
    // Desk-scale trainer adaptations: richer replay batches and denser model
    // snapshots stabilize the 40x-shortened training; the scenario drops the
    // transient external source whose flybys are policy-invariant losses at
    // this scale (criterion 8 keeps it).
    cfg.scenario.interferer_power_w = 0.0;
    cfg.trainer.batch_transitions = 240;
    cfg.trainer.eval_period = 100;

    std::vector<double> model_utility(kSeeds), rpa_utility(kSeeds), model_delivery(kSeeds);
    parallel_over_seeds(kSeeds, [&](int s) {
        std::uint64_t seed = 1000 + static_cast<std::uint64_t>(s);
        env::Environment e = config::make_environment(cfg.scenario);
        marl::TrainResult r = marl::train(e, cfg.trainer, seed, 0.0,
                                          env::MalfunctionMode::kSilent);
        neural::PolicyNet net = neural::PolicyNet::from_params(r.arch, r.selected_params);
        policy::NetPolicy pi(net);
        std::uint64_t eval_seed = derive_seed(77, static_cast<std::uint64_t>(s));
        model_utility[static_cast<std::size_t>(s)] = mean_eval_utility(
            cfg.scenario, pi, 100, eval_seed, 0.0, env::MalfunctionMode::kRandom);
        model_delivery[static_cast<std::size_t>(s)] = mean_eval_delivery(
            cfg.scenario, pi, 100, eval_seed, 0.0, env::MalfunctionMode::kRandom);
        baselines::RpaPolicy rpa;
        rpa_utility[static_cast<std::size_t>(s)] = mean_eval_utility(
            cfg.scenario, rpa, 100, eval_seed, 0.0, env::MalfunctionMode::kRandom);
    });

    int wins = 0;
    double delivery_sum = 0.0;
    for (int s = 0; s < kSeeds; ++s) {
        if (model_utility[static_cast<std::size_t>(s)] >
            rpa_utility[static_cast<std::size_t>(s)]) {
            ++wins;
        }
        delivery_sum += model_delivery[static_cast<std::size_t>(s)];
        std::printf("    seed %d: model %.4f vs rpa %.4f, delivery %.4f\n", s,
                    model_utility[static_cast<std::size_t>(s)],
                    rpa_utility[static_cast<std::size_t>(s)],
                    model_delivery[static_cast<std::size_t>(s)]);
    }
    require(wins >= 8, "trained model must beat the random baseline in >= 8 of 10 seeds (got " +
                           std::to_string(wins) + ")");
    require(delivery_sum / kSeeds >= 0.9,
            "mean delivery ratio must be >= 0.9 (got " + std::to_string(delivery_sum / kSeeds) +
                ")");
}

void criterion_curriculum_behavior() {
    // (a) unreachable threshold: rate pinned at zero for the whole training
    {
        config::RunConfig cfg = desk_config(3, 2000);
        cfg.trainer.eval_period = 200;
        cfg.trainer.eval_runs = 10;
        env::Environment e = config::make_environment(cfg.scenario);
        curriculum::Controller hook(3.0, 0.1, 0.6); // above the alpha+beta utility ceiling
        marl::TrainResult r =
            marl::train(e, cfg.trainer, 11, 0.0, env::MalfunctionMode::kSilent, &hook);
        for (const marl::LogRow& row : r.log) {
            require(row.malfunction_rate == 0.0, "epsilon must stay 0 under unreachable u_th");
        }
        require(hook.state().epsilon == 0.0, "final epsilon must be 0");
    }

    // (b) threshold at the random-policy floor: the rate must reach its cap in
    // the predicted number of evaluations (geometric climb), +/- 1. Trained
    // with random-mode malfunctions so that the network keeps carrying
    // traffic as the rate climbs, and evaluated from the first competent
    // checkpoint onward.
    {
        config::RunConfig cfg = desk_config(3, 8800);
        cfg.trainer.eval_period = 800;
        cfg.trainer.eval_runs = 20;

        baselines::RpaPolicy rpa;
        double u_min =
            mean_eval_utility(cfg.scenario, rpa, 20, 555, 0.0, env::MalfunctionMode::kSilent);

        env::Environment e = config::make_environment(cfg.scenario);
        curriculum::Controller hook(u_min, 0.1, 0.6);
        marl::TrainResult r =
            marl::train(e, cfg.trainer, 12, 0.0, env::MalfunctionMode::kRandom, &hook);
        (void)r;

        int predicted = curriculum::evaluations_to_reach_max(0.1, 0.6);
        require(predicted == 9, "geometric prediction for gamma=0.1, cap 0.6 is 9");
        int observed = -1;
        const auto& history = hook.state().utility_history;
        curriculum::CurriculumState replay;
        replay.u_th = u_min;
        replay.gamma_lf = 0.1;
        replay.epsilon_max = 0.6;
        for (std::size_t i = 0; i < history.size(); ++i) {
            replay = curriculum::adjust_epsilon(replay, history[i]);
            if (replay.epsilon >= 0.6 && observed < 0) observed = static_cast<int>(i) + 1;
            require(replay.epsilon >= 0.0 && replay.epsilon <= 0.6, "epsilon out of range");
        }
        std::printf("    curriculum climb: predicted %d evaluations, observed %d\n", predicted,
                    observed);
        require(observed > 0, "epsilon never reached its cap");
        require(std::abs(observed - predicted) <= 1,
                "epsilon must reach the cap within +/- 1 evaluation of the prediction");
    }
}

void criterion_robustness_ordering() {
    const int kSeeds = 10;
    const double kEvalRate = 0.6;
    config::RunConfig cfg = desk_config(5, 10000);

    std::vector<double> fixed_utility(kSeeds), curriculum_utility(kSeeds);
    parallel_over_seeds(kSeeds, [&](int s) {
        std::uint64_t seed = 9000 + static_cast<std::uint64_t>(s);

        // partner A: trained in the perfect environment
        env::Environment ea = config::make_environment(cfg.scenario);
        marl::TrainResult ra =
            marl::train(ea, cfg.trainer, seed, 0.0, env::MalfunctionMode::kSilent);
        neural::PolicyNet na = neural::PolicyNet::from_params(ra.arch, ra.selected_params);

        // per-seed threshold calibration from the perfect-environment model
        policy::NetPolicy pa(na);
        double u_max = mean_eval_utility(cfg.scenario, pa, 20, derive_seed(seed, 0xAAA), 0.0,
                                         env::MalfunctionMode::kSilent);
        baselines::RpaPolicy rpa;
        double u_min = mean_eval_utility(cfg.scenario, rpa, 20, derive_seed(seed, 0xBBB), 0.0,
                                         env::MalfunctionMode::kSilent);
        double u_th = u_min + 0.75 * (u_max - u_min);

        // partner B: curriculum-trained with the rate-adjustment hook
        env::Environment eb = config::make_environment(cfg.scenario);
        curriculum::Controller hook(u_th, 0.1, kEvalRate);
        marl::TrainResult rb = marl::train(eb, cfg.trainer, derive_seed(seed, 0xCCC), 0.0,
                                           env::MalfunctionMode::kSilent, &hook);
        neural::PolicyNet nb = neural::PolicyNet::from_params(rb.arch, rb.selected_params);

        // both evaluated in the imperfect network, shared episode seeds
        std::uint64_t eval_seed = derive_seed(31337, static_cast<std::uint64_t>(s));
        policy::NetPolicy pia(na), pib(nb);
        fixed_utility[static_cast<std::size_t>(s)] = mean_eval_utility(
            cfg.scenario, pia, 100, eval_seed, kEvalRate, env::MalfunctionMode::kRandom);
        curriculum_utility[static_cast<std::size_t>(s)] = mean_eval_utility(
            cfg.scenario, pib, 100, eval_seed, kEvalRate, env::MalfunctionMode::kRandom);
    });

    int wins = 0;
    for (int s = 0; s < kSeeds; ++s) {
        bool win = curriculum_utility[static_cast<std::size_t>(s)] >
                   fixed_utility[static_cast<std::size_t>(s)];
        wins += win ? 1 : 0;
        std::printf("    seed %d: curriculum %.4f vs fixed %.4f%s\n", s,
                    curriculum_utility[static_cast<std::size_t>(s)],
                    fixed_utility[static_cast<std::size_t>(s)], win ? "" : "  (loss)");
    }
    require(wins >= 7, "curriculum training must win in >= 7 of 10 paired seeds (got " +
                           std::to_string(wins) + ")");
}

// ---------------------------------------------------------------------------
// Criterion 9: determinism and persistence.
// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism_persistence() {
    fs::path tmp = fs::temp_directory_path() / "uwjsa_acceptance_c9";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    config::RunConfig cfg = desk_config(2, 60);
    cfg.trainer.eval_period = 20;
    cfg.trainer.eval_runs = 2;
    cfg.trainer.target_update_period = 20;

    io::Model model = runner::run_train(cfg, (tmp / "train").string(), 4242);

    io::Model loaded = io::load_model((tmp / "train" / "model").string());
    require(loaded.params.size() == model.params.size(), "checkpoint size changed");
    require(std::memcmp(loaded.params.data(), model.params.data(),
                        loaded.params.size() * sizeof(float)) == 0,
            "checkpoint params must round-trip bit-exactly");

    runner::EvalOptions opts;
    opts.policy = "icrl";
    opts.episodes = 20;
    runner::run_eval(cfg, &model, opts, (tmp / "eval_a").string(), 7);
    runner::run_eval(cfg, &loaded, opts, (tmp / "eval_b").string(), 7);
    require(slurp(tmp / "eval_a" / "episodes.csv") == slurp(tmp / "eval_b" / "episodes.csv"),
            "evaluation after reload must be byte-identical");
    require(slurp(tmp / "eval_a" / "aggregate.json") == slurp(tmp / "eval_b" / "aggregate.json"),
            "aggregate after reload must be byte-identical");

    config::RunConfig from_manifest =
        config::load_file((tmp / "train" / "manifest.json").string());
    runner::run_train(from_manifest, (tmp / "train2").string(), 4242);
    require(slurp(tmp / "train" / "training_log.csv") ==
                slurp(tmp / "train2" / "training_log.csv"),
            "manifest rerun must reproduce the training log byte for byte");
    require(slurp(tmp / "train" / "model" / "params.bin") ==
                slurp(tmp / "train2" / "model" / "params.bin"),
            "manifest rerun must reproduce the checkpoint byte for byte");

    fs::remove_all(tmp);
}

struct Criterion {
    int number;
    const char* label;
    std::function<void()> run;
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            std::stringstream ss(argv[i + 1]);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.insert(std::atoi(tok.c_str()));
            ++i;
        }
    }

    const std::vector<Criterion> criteria = {
        {1, "formula oracle suite (1000 random inputs each, rel err 1e-9)",
         criterion_formula_oracles},
        {2, "index bounds under fuzzing (1e5 outcomes)", criterion_index_bounds},
        {3, "recurrent gradient vs finite differences (100 draws, rel err 1e-4)",
         criterion_gradient_check},
        {4, "IGM brute force (1000 joint tables)", criterion_igm_brute_force},
        {5, "energy and lifetime semantics (exact ledger)", criterion_energy_lifetime},
        {6, "learning sanity: 3 pairs, 5000 episodes, 10 seeds vs random baseline",
         criterion_learning_sanity},
        {7, "curriculum behavior: pinned floor and geometric climb",
         criterion_curriculum_behavior},
        {8, "robustness ordering: curriculum vs perfect-only training at rate 0.6",
         criterion_robustness_ordering},
        {9, "determinism and persistence", criterion_determinism_persistence},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && !only.count(c.number)) continue;
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            c.run();
        } catch (const Failure& f) {
            ok = false;
            detail = f.detail;
        } catch (const std::exception& ex) {
            ok = false;
            detail = std::string("unexpected error: ") + ex.what();
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok) {
            std::printf("PASS  criterion %d: %s  [%.1fs]\n", c.number, c.label, secs);
        } else {
            std::printf("FAIL  criterion %d: %s  [%.1fs]\n      %s\n", c.number, c.label, secs,
                        detail.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    std::printf("%d criteria failed, %d checks executed\n", failures, g_checks);
    return failures == 0 ? 0 : 1;
}
