#pragma once

#include "marl.hpp"

#include <functional>
#include <string>
#include <vector>

namespace uwjsa::curriculum {

struct CurriculumState {
    double epsilon = 0.0;
    double u_th = 0.0;
    double gamma_lf = 0.01; // learning factor
    double epsilon_max = 0.6;
    int eval_count = 0;
    std::vector<double> utility_history;
};

// Geometric malfunction-rate update: above the threshold the rate climbs
// toward epsilon_max, below it decays toward zero.
//   up:   eps <- min(eps + gamma * (1 - eps), epsilon_max)
//   down: eps <- max(0, eps * (1 - gamma))
CurriculumState adjust_epsilon(CurriculumState state, double mean_utility);

// Evaluations needed for the uncapped geometric climb from 0 to reach
// epsilon_max.
int evaluations_to_reach_max(double gamma_lf, double epsilon_max);

// Trainer-facing adapter: holds the rate between evaluations.
class Controller : public marl::CurriculumHook {
  public:
    Controller(double u_th, double gamma_lf, double epsilon_max, double epsilon0 = 0.0);

    double malfunction_rate() const override { return state_.epsilon; }
    void on_evaluation(double mean_utility) override;
    const CurriculumState& state() const { return state_; }

  private:
    CurriculumState state_;
};

using EnvFactory = std::function<env::Environment()>;

// Mean utility of greedy rollouts (PE module evaluation).
double evaluate_mean_utility(env::Environment& environment, const neural::PolicyNet& net,
                             int n_eva, std::uint64_t seed, double malfunction_rate,
                             env::MalfunctionMode mode);

struct Bounds {
    double u_min = 0.0;
    double u_max = 0.0;
};

// u_max from a model trained in the perfect environment, u_min from the
// uncontrolled random policy, both over n_eva greedy evaluation episodes.
// Fails when the scenario is degenerate (u_min >= u_max).
Bounds calibrate_bounds(const EnvFactory& factory, const marl::TrainerConfig& trainer_cfg,
                        int n_eva, std::uint64_t seed);

struct GridSpec {
    int thresholds = 5; // s >= 2 when u_max > u_min
    std::vector<double> factors = {0.001, 0.01, 0.1};
};

struct CellResult {
    double u_th = 0.0;
    double gamma_lf = 0.0;
    bool ok = false;
    std::string error;
    double mean_reward = 0.0;  // R-bar over n_eva runs of the trained model
    double mean_utility = 0.0;
    double final_epsilon = 0.0;
    marl::TrainResult train;
};

struct SweepResult {
    Bounds bounds;
    std::vector<CellResult> cells; // factor-major, threshold-minor order
    int best_index = -1;           // argmax mean_reward over successful cells
};

// Grid search of the advanced training mechanism: one curriculum training per
// (u_th, gamma) cell, each from fresh parameters with its own derived seed.
// Cells run across a small worker pool; failures are recorded, not fatal.
SweepResult grid_search(const EnvFactory& factory, const marl::TrainerConfig& trainer_cfg,
                        const GridSpec& grid, Bounds bounds, int n_eva, double epsilon_max,
                        double eval_malfunction_rate, env::MalfunctionMode eval_mode,
                        env::MalfunctionMode train_mode, std::uint64_t seed, int workers);

} // namespace uwjsa::curriculum
