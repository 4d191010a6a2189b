#include "curriculum.hpp"

#include "baselines.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace uwjsa::curriculum {

CurriculumState adjust_epsilon(CurriculumState state, double mean_utility) {
    state.eval_count += 1;
    state.utility_history.push_back(mean_utility);
    if (mean_utility >= state.u_th) {
        state.epsilon = std::min(state.epsilon + state.gamma_lf * (1.0 - state.epsilon),
                                 state.epsilon_max);
    } else {
        state.epsilon = std::max(0.0, state.epsilon * (1.0 - state.gamma_lf));
    }
    return state;
}

int evaluations_to_reach_max(double gamma_lf, double epsilon_max) {
    if (gamma_lf <= 0.0 || gamma_lf >= 1.0 || epsilon_max <= 0.0 || epsilon_max >= 1.0) {
        throw std::invalid_argument("evaluations_to_reach_max: parameters outside (0,1)");
    }
    // Uncapped climb from 0: eps_k = 1 - (1 - gamma)^k.
    return static_cast<int>(std::ceil(std::log1p(-epsilon_max) / std::log1p(-gamma_lf)));
}

Controller::Controller(double u_th, double gamma_lf, double epsilon_max, double epsilon0) {
    if (epsilon_max < 0.0 || epsilon_max > 1.0) {
        throw std::invalid_argument("Controller: epsilon_max outside [0,1]");
    }
    if (gamma_lf <= 0.0 || gamma_lf >= 1.0) {
        throw std::invalid_argument("Controller: learning factor outside (0,1)");
    }
    state_.u_th = u_th;
    state_.gamma_lf = gamma_lf;
    state_.epsilon_max = epsilon_max;
    state_.epsilon = std::clamp(epsilon0, 0.0, epsilon_max);
}

void Controller::on_evaluation(double mean_utility) {
    state_ = adjust_epsilon(state_, mean_utility);
}

double evaluate_mean_utility(env::Environment& environment, const neural::PolicyNet& net,
                             int n_eva, std::uint64_t seed, double malfunction_rate,
                             env::MalfunctionMode mode) {
    if (n_eva < 1) throw std::invalid_argument("evaluate_mean_utility: n_eva must be >= 1");
    return marl::evaluate_greedy(environment, net, n_eva, seed, malfunction_rate, mode)
        .mean_utility;
}

Bounds calibrate_bounds(const EnvFactory& factory, const marl::TrainerConfig& trainer_cfg,
                        int n_eva, std::uint64_t seed) {
    env::Environment environment = factory();

    marl::TrainResult perfect = marl::train(environment, trainer_cfg, derive_seed(seed, 0xCA1ull),
                                            0.0, env::MalfunctionMode::kSilent);
    neural::PolicyNet net =
        neural::PolicyNet::from_params(perfect.arch, perfect.selected_params);
    Bounds b;
    b.u_max = evaluate_mean_utility(environment, net, n_eva, derive_seed(seed, 0xCA2ull), 0.0,
                                    env::MalfunctionMode::kSilent);

    baselines::RpaPolicy rpa;
    double total = 0.0;
    for (int i = 0; i < n_eva; ++i) {
        policy::Rollout r =
            policy::run_episode(environment, rpa,
                                derive_seed(seed, 0xCA3000ull + static_cast<std::uint64_t>(i)),
                                0.0, env::MalfunctionMode::kSilent);
        total += r.report.utility;
    }
    b.u_min = total / n_eva;

    if (b.u_min >= b.u_max) {
        throw std::runtime_error(
            "calibrate_bounds: degenerate scenario, random policy matches the trained model "
            "(u_min >= u_max)");
    }
    return b;
}

SweepResult grid_search(const EnvFactory& factory, const marl::TrainerConfig& trainer_cfg,
                        const GridSpec& grid, Bounds bounds, int n_eva, double epsilon_max,
                        double eval_malfunction_rate, env::MalfunctionMode eval_mode,
                        env::MalfunctionMode train_mode, std::uint64_t seed, int workers) {
    if (grid.thresholds < 1 || grid.factors.empty()) {
        throw std::invalid_argument("grid_search: empty grid");
    }
    if (grid.thresholds > 1 && bounds.u_max <= bounds.u_min) {
        throw std::invalid_argument("grid_search: bounds must satisfy u_min < u_max");
    }
    double delta_u = grid.thresholds > 1
                         ? (bounds.u_max - bounds.u_min) / (grid.thresholds - 1)
                         : 0.0;

    SweepResult result;
    result.bounds = bounds;
    result.cells.resize(grid.factors.size() * static_cast<std::size_t>(grid.thresholds));
    for (std::size_t g = 0; g < grid.factors.size(); ++g) {
        for (int j = 0; j < grid.thresholds; ++j) {
            CellResult& cell = result.cells[g * static_cast<std::size_t>(grid.thresholds) +
                                            static_cast<std::size_t>(j)];
            cell.gamma_lf = grid.factors[g];
            cell.u_th = bounds.u_min + j * delta_u;
        }
    }

    auto run_cell = [&](std::size_t index) {
        CellResult& cell = result.cells[index];
        try {
            env::Environment environment = factory();
            Controller controller(cell.u_th, cell.gamma_lf, epsilon_max);
            std::uint64_t cell_seed = derive_seed(seed, 0xCE11ull + index);
            cell.train = marl::train(environment, trainer_cfg, cell_seed, 0.0, train_mode,
                                     &controller);
            cell.final_epsilon = controller.state().epsilon;

            neural::PolicyNet net =
                neural::PolicyNet::from_params(cell.train.arch, cell.train.selected_params);
            policy::NetPolicy pi(net);
            double reward = 0.0, utility = 0.0;
            for (int i = 0; i < n_eva; ++i) {
                policy::Rollout r = policy::run_episode(
                    environment, pi,
                    derive_seed(cell_seed, 0xE7A0ull + static_cast<std::uint64_t>(i)),
                    eval_malfunction_rate, eval_mode);
                reward += r.accumulated_reward;
                utility += r.report.utility;
            }
            cell.mean_reward = reward / n_eva;
            cell.mean_utility = utility / n_eva;
            cell.ok = true;
        } catch (const std::exception& ex) {
            cell.ok = false;
            cell.error = ex.what();
        }
    };

    int pool = std::max(1, workers);
    if (pool == 1) {
        for (std::size_t i = 0; i < result.cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(pool));
        for (int w = 0; w < pool; ++w) {
            threads.emplace_back([&]() {
                while (true) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= result.cells.size()) break;
                    run_cell(i);
                }
            });
        }
        for (std::thread& t : threads) t.join();
    }

    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        if (!result.cells[i].ok) continue;
        if (result.best_index < 0 ||
            result.cells[i].mean_reward >
                result.cells[static_cast<std::size_t>(result.best_index)].mean_reward) {
            result.best_index = static_cast<int>(i);
        }
    }
    return result;
}

} // namespace uwjsa::curriculum
