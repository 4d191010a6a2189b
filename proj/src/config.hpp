#pragma once

#include "curriculum.hpp"
#include "env.hpp"
#include "marl.hpp"

#include <optional>
#include <string>

#include <json.hpp>

namespace uwjsa::config {

// Raised on malformed or unknown configuration; message names the key.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct MalfunctionConfig {
    double train_rate = 0.0;
    double eval_rate = 0.0;
    env::MalfunctionMode train_mode = env::MalfunctionMode::kSilent;
    env::MalfunctionMode eval_mode = env::MalfunctionMode::kRandom;
};

struct ScenarioConfig {
    std::string type = "unicast"; // unicast | broadcast
    int n_pairs = 5;              // transmitters (and receivers)
    double ring_fraction = 0.6;
    acoustics::ChannelParams channel;
    double gamma_th_db = 10.0;
    std::vector<double> power_levels_w = {2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
    double battery_j = 5000.0;
    double cease_fraction = 0.1;
    double t_tran_s = 3.0;
    double t_guard_s = 0.1;
    int delta0 = 30;
    metrics::UtilityWeights weights;
    int fairness_window_h = 0; // 0 -> |N_send|
    double violation_penalty = -100.0;
    MalfunctionConfig malfunction;
    world::MobilityConfig mobility;
    double interferer_power_w = 4.0;
    std::string deployment_file; // optional, replaces the generated layout
};

struct CurriculumConfig {
    bool present = false;
    std::optional<double> u_th;
    double learning_factor = 0.01;
    double epsilon_max = 0.6;
    int n_eva = 20;
    curriculum::GridSpec grid;
    std::optional<curriculum::Bounds> bounds;
};

struct RunConfig {
    ScenarioConfig scenario;
    marl::TrainerConfig trainer;
    CurriculumConfig curriculum;
};

RunConfig from_json(const nlohmann::json& j);
RunConfig parse_text(const std::string& json_text);
RunConfig load_file(const std::string& path);

// Fully expanded snapshot (defaults applied), reparses to the same config.
nlohmann::json to_json(const RunConfig& cfg);

env::EnvConfig make_env_config(const ScenarioConfig& sc);
env::Environment make_environment(const ScenarioConfig& sc);

} // namespace uwjsa::config
