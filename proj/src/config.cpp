#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace uwjsa::config {

namespace {

using nlohmann::json;

// Pulls known keys out of an object section and rejects leftovers so that a
// typo fails loudly instead of silently using a default.
class Section {
  public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path_ + "." + key + ": wrong type");
        }
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& sub(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ConfigError(path_ + "." + it.key() + ": unknown key");
            }
        }
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

env::MalfunctionMode mode_from_string(const std::string& s, const std::string& path) {
    if (s == "silent") return env::MalfunctionMode::kSilent;
    if (s == "random") return env::MalfunctionMode::kRandom;
    throw ConfigError(path + ": expected 'silent' or 'random'");
}

std::string mode_to_string(env::MalfunctionMode m) {
    return m == env::MalfunctionMode::kSilent ? "silent" : "random";
}

acoustics::NoiseConfig noise_from_json(const json& j, const std::string& path) {
    Section s(j, path);
    acoustics::NoiseConfig n;
    std::string mode = "spectral";
    s.get("mode", mode);
    if (mode == "constant") {
        n.mode = acoustics::NoiseConfig::Mode::kConstantPower;
        s.get("power_w", n.constant_power_w);
    } else if (mode == "spectral") {
        n.mode = acoustics::NoiseConfig::Mode::kSpectralModel;
        s.get("shipping", n.shipping);
        s.get("wind_mps", n.wind_mps);
    } else {
        throw ConfigError(path + ".mode: expected 'constant' or 'spectral'");
    }
    s.finish();
    return n;
}

ScenarioConfig scenario_from_json(const json& j) {
    Section s(j, "scenario");
    ScenarioConfig sc;
    s.get("type", sc.type);
    if (sc.type != "unicast" && sc.type != "broadcast") {
        throw ConfigError("scenario.type: expected 'unicast' or 'broadcast'");
    }
    s.get("n_pairs", sc.n_pairs);
    if (sc.n_pairs < 1) throw ConfigError("scenario.n_pairs: must be >= 1");
    s.get("ring_fraction", sc.ring_fraction);
    if (s.has("channel")) {
        Section c(s.sub("channel"), "scenario.channel");
        c.get("carrier_freq_khz", sc.channel.carrier_freq_khz);
        c.get("bandwidth_hz", sc.channel.bandwidth_hz);
        c.get("spreading_factor_k", sc.channel.spreading_factor_k);
        c.get("norm_const_a0", sc.channel.norm_const_a0);
        c.get("sound_speed_mps", sc.channel.sound_speed_mps);
        c.get("transducer_eff", sc.channel.transducer_eff);
        if (c.has("noise")) {
            sc.channel.ambient_noise = noise_from_json(c.sub("noise"), "scenario.channel.noise");
        }
        c.finish();
    }
    s.get("gamma_th_db", sc.gamma_th_db);
    s.get("power_levels_w", sc.power_levels_w);
    s.get("battery_j", sc.battery_j);
    s.get("cease_fraction", sc.cease_fraction);
    s.get("t_tran_s", sc.t_tran_s);
    s.get("t_guard_s", sc.t_guard_s);
    s.get("delta0", sc.delta0);
    if (sc.delta0 < 1) throw ConfigError("scenario.delta0: must be >= 1");
    if (s.has("weights")) {
        Section w(s.sub("weights"), "scenario.weights");
        w.get("alpha", sc.weights.alpha);
        w.get("beta", sc.weights.beta);
        w.get("mu", sc.weights.mu);
        w.finish();
        if (sc.weights.alpha == 0.0 && sc.weights.beta == 0.0 && sc.weights.mu == 0.0) {
            throw ConfigError("scenario.weights: not all weights may be zero");
        }
    }
    s.get("fairness_window_h", sc.fairness_window_h);
    s.get("violation_penalty", sc.violation_penalty);
    if (s.has("malfunction")) {
        Section m(s.sub("malfunction"), "scenario.malfunction");
        m.get("train_rate", sc.malfunction.train_rate);
        m.get("eval_rate", sc.malfunction.eval_rate);
        std::string train_mode = mode_to_string(sc.malfunction.train_mode);
        std::string eval_mode = mode_to_string(sc.malfunction.eval_mode);
        m.get("train_mode", train_mode);
        m.get("eval_mode", eval_mode);
        sc.malfunction.train_mode = mode_from_string(train_mode, "scenario.malfunction.train_mode");
        sc.malfunction.eval_mode = mode_from_string(eval_mode, "scenario.malfunction.eval_mode");
        m.finish();
    }
    if (s.has("mobility")) {
        Section m(s.sub("mobility"), "scenario.mobility");
        m.get("current_speed_mps", sc.mobility.current_speed_mps);
        m.get("drift_direction_deg", sc.mobility.drift_direction_deg);
        m.get("jitter_std_mps", sc.mobility.jitter_std_mps);
        m.get("region_radius_m", sc.mobility.region_radius_m);
        m.get("region_height_m", sc.mobility.region_height_m);
        m.finish();
    }
    s.get("interferer_power_w", sc.interferer_power_w);
    s.get("deployment_file", sc.deployment_file);
    s.finish();
    return sc;
}

marl::TrainerConfig trainer_from_json(const json& j) {
    Section s(j, "trainer");
    marl::TrainerConfig tc;
    s.get("episodes", tc.episodes);
    std::int64_t cap = static_cast<std::int64_t>(tc.buffer_capacity);
    s.get("buffer_capacity", cap);
    if (cap < 1) throw ConfigError("trainer.buffer_capacity: must be >= 1");
    tc.buffer_capacity = static_cast<std::size_t>(cap);
    s.get("batch_transitions", tc.batch_transitions);
    s.get("learning_rate", tc.learning_rate);
    s.get("discount", tc.discount);
    s.get("explore_start", tc.explore_start);
    s.get("explore_end", tc.explore_end);
    s.get("explore_anneal_fraction", tc.explore_anneal_fraction);
    s.get("eval_period", tc.eval_period);
    s.get("eval_runs", tc.eval_runs);
    s.get("target_update_period", tc.target_update_period);
    s.finish();
    return tc;
}

CurriculumConfig curriculum_from_json(const json& j) {
    Section s(j, "curriculum");
    CurriculumConfig cc;
    cc.present = true;
    if (s.has("u_th")) {
        double v = 0.0;
        s.get("u_th", v);
        cc.u_th = v;
    }
    s.get("learning_factor", cc.learning_factor);
    s.get("epsilon_max", cc.epsilon_max);
    s.get("n_eva", cc.n_eva);
    if (s.has("grid")) {
        Section g(s.sub("grid"), "curriculum.grid");
        g.get("thresholds", cc.grid.thresholds);
        g.get("factors", cc.grid.factors);
        g.finish();
    }
    if (s.has("bounds")) {
        Section b(s.sub("bounds"), "curriculum.bounds");
        curriculum::Bounds bounds;
        b.get("u_min", bounds.u_min);
        b.get("u_max", bounds.u_max);
        b.finish();
        cc.bounds = bounds;
    }
    s.finish();
    return cc;
}

} // namespace

RunConfig from_json(const nlohmann::json& j) {
    Section root(j, "config");
    int format = 1;
    root.get("format", format);
    if (format != 1) throw ConfigError("format: unsupported config format (expected 1)");
    RunConfig cfg;
    if (root.has("scenario")) cfg.scenario = scenario_from_json(root.sub("scenario"));
    if (root.has("trainer")) cfg.trainer = trainer_from_json(root.sub("trainer"));
    if (root.has("curriculum")) cfg.curriculum = curriculum_from_json(root.sub("curriculum"));
    root.finish();
    return cfg;
}

RunConfig parse_text(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("config: invalid JSON: ") + ex.what());
    }
    // A run manifest embeds the config snapshot it was produced from.
    if (j.is_object() && j.contains("uwjsa_manifest")) {
        if (!j.contains("config")) throw ConfigError("manifest: missing embedded config");
        return from_json(j.at("config"));
    }
    return from_json(j);
}

RunConfig load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

nlohmann::json to_json(const RunConfig& cfg) {
    const ScenarioConfig& sc = cfg.scenario;
    nlohmann::json noise;
    if (sc.channel.ambient_noise.mode == acoustics::NoiseConfig::Mode::kConstantPower) {
        noise = {{"mode", "constant"}, {"power_w", sc.channel.ambient_noise.constant_power_w}};
    } else {
        noise = {{"mode", "spectral"},
                 {"shipping", sc.channel.ambient_noise.shipping},
                 {"wind_mps", sc.channel.ambient_noise.wind_mps}};
    }
    nlohmann::json j = {
        {"format", 1},
        {"scenario",
         {{"type", sc.type},
          {"n_pairs", sc.n_pairs},
          {"ring_fraction", sc.ring_fraction},
          {"channel",
           {{"carrier_freq_khz", sc.channel.carrier_freq_khz},
            {"bandwidth_hz", sc.channel.bandwidth_hz},
            {"spreading_factor_k", sc.channel.spreading_factor_k},
            {"norm_const_a0", sc.channel.norm_const_a0},
            {"sound_speed_mps", sc.channel.sound_speed_mps},
            {"transducer_eff", sc.channel.transducer_eff},
            {"noise", noise}}},
          {"gamma_th_db", sc.gamma_th_db},
          {"power_levels_w", sc.power_levels_w},
          {"battery_j", sc.battery_j},
          {"cease_fraction", sc.cease_fraction},
          {"t_tran_s", sc.t_tran_s},
          {"t_guard_s", sc.t_guard_s},
          {"delta0", sc.delta0},
          {"weights",
           {{"alpha", sc.weights.alpha}, {"beta", sc.weights.beta}, {"mu", sc.weights.mu}}},
          {"fairness_window_h", sc.fairness_window_h},
          {"violation_penalty", sc.violation_penalty},
          {"malfunction",
           {{"train_rate", sc.malfunction.train_rate},
            {"eval_rate", sc.malfunction.eval_rate},
            {"train_mode", mode_to_string(sc.malfunction.train_mode)},
            {"eval_mode", mode_to_string(sc.malfunction.eval_mode)}}},
          {"mobility",
           {{"current_speed_mps", sc.mobility.current_speed_mps},
            {"drift_direction_deg", sc.mobility.drift_direction_deg},
            {"jitter_std_mps", sc.mobility.jitter_std_mps},
            {"region_radius_m", sc.mobility.region_radius_m},
            {"region_height_m", sc.mobility.region_height_m}}},
          {"interferer_power_w", sc.interferer_power_w},
          {"deployment_file", sc.deployment_file}}},
        {"trainer",
         {{"episodes", cfg.trainer.episodes},
          {"buffer_capacity", cfg.trainer.buffer_capacity},
          {"batch_transitions", cfg.trainer.batch_transitions},
          {"learning_rate", cfg.trainer.learning_rate},
          {"discount", cfg.trainer.discount},
          {"explore_start", cfg.trainer.explore_start},
          {"explore_end", cfg.trainer.explore_end},
          {"explore_anneal_fraction", cfg.trainer.explore_anneal_fraction},
          {"eval_period", cfg.trainer.eval_period},
          {"eval_runs", cfg.trainer.eval_runs},
          {"target_update_period", cfg.trainer.target_update_period}}}};
    if (cfg.curriculum.present) {
        nlohmann::json cj = {{"learning_factor", cfg.curriculum.learning_factor},
                             {"epsilon_max", cfg.curriculum.epsilon_max},
                             {"n_eva", cfg.curriculum.n_eva},
                             {"grid",
                              {{"thresholds", cfg.curriculum.grid.thresholds},
                               {"factors", cfg.curriculum.grid.factors}}}};
        if (cfg.curriculum.u_th) cj["u_th"] = *cfg.curriculum.u_th;
        if (cfg.curriculum.bounds) {
            cj["bounds"] = {{"u_min", cfg.curriculum.bounds->u_min},
                            {"u_max", cfg.curriculum.bounds->u_max}};
        }
        j["curriculum"] = std::move(cj);
    }
    return j;
}

env::EnvConfig make_env_config(const ScenarioConfig& sc) {
    env::EnvConfig ec;
    if (!sc.deployment_file.empty()) {
        ec.deployment = world::load_deployment(sc.deployment_file);
    } else {
        ec.deployment = world::make_ring_deployment(
            sc.n_pairs, sc.type == "broadcast", sc.mobility.region_radius_m,
            sc.mobility.region_height_m, sc.ring_fraction, sc.battery_j, sc.interferer_power_w);
    }
    ec.mobility = sc.mobility;
    ec.channel = sc.channel;
    ec.gamma_th_db = sc.gamma_th_db;
    ec.actions.levels_w = {0.0};
    for (double p : sc.power_levels_w) ec.actions.levels_w.push_back(p);
    ec.reward.weights = sc.weights;
    ec.reward.fairness_window_h = sc.fairness_window_h;
    ec.reward.lifetime_requirement_slots = sc.delta0;
    ec.reward.violation_penalty = sc.violation_penalty;
    ec.t_tran_s = sc.t_tran_s;
    ec.t_guard_s = sc.t_guard_s;
    ec.cease_fraction = sc.cease_fraction;
    ec.scenario =
        sc.type == "broadcast" ? metrics::Scenario::kBroadcast : metrics::Scenario::kUnicast;
    return ec;
}

env::Environment make_environment(const ScenarioConfig& sc) {
    return env::Environment(make_env_config(sc));
}

} // namespace uwjsa::config
