#include "runner.hpp"

#include "baselines.hpp"

#include <atomic>
#include <filesystem>
#include <thread>

namespace uwjsa::runner {

namespace fs = std::filesystem;

namespace {

std::string opt_cell(const std::optional<double>& v) {
    return v ? io::format_double(*v) : std::string();
}

void write_training_log(const std::string& path, const marl::TrainResult& result) {
    io::CsvWriter csv(path);
    csv.header({"episode", "malfunction_rate", "mean_eval_reward", "loss", "buffer_transitions"});
    for (const marl::LogRow& row : result.log) {
        csv.row({std::to_string(row.episode), io::format_double(row.malfunction_rate),
                 opt_cell(row.mean_eval_reward), opt_cell(row.loss),
                 std::to_string(row.buffer_fill)});
    }
    csv.flush();
}

io::Model model_from_train(const config::RunConfig& cfg, const marl::TrainResult& result,
                           std::uint64_t seed) {
    io::Model m;
    m.arch = result.arch;
    m.params = result.selected_params;
    m.metadata = {{"seed", seed},
                  {"selected_episode", result.selected_episode},
                  {"episodes", cfg.trainer.episodes},
                  {"final_malfunction_rate", result.final_malfunction_rate},
                  {"max_malfunction_rate", result.max_malfunction_rate},
                  {"scenario_type", cfg.scenario.type},
                  {"n_pairs", cfg.scenario.n_pairs}};
    return m;
}

struct EpisodeRow {
    int episode;
    std::uint64_t seed;
    metrics::EpisodeReport report;
};

std::vector<EpisodeRow> evaluate_policy(const config::RunConfig& cfg, policy::Policy& pi,
                                        int episodes, std::uint64_t seed) {
    env::Environment environment = config::make_environment(cfg.scenario);
    const config::MalfunctionConfig& mc = cfg.scenario.malfunction;
    std::vector<EpisodeRow> rows;
    rows.reserve(static_cast<std::size_t>(episodes));
    for (int i = 0; i < episodes; ++i) {
        std::uint64_t ep_seed = derive_seed(seed, 0xE0A1ull + static_cast<std::uint64_t>(i));
        policy::Rollout r = policy::run_episode(environment, pi, ep_seed, mc.eval_rate,
                                                mc.eval_mode);
        rows.push_back({i + 1, ep_seed, r.report});
    }
    return rows;
}

metrics::EpisodeReport mean_report(const std::vector<EpisodeRow>& rows) {
    metrics::EpisodeReport mean;
    double lifetime = 0.0;
    for (const EpisodeRow& r : rows) {
        mean.utility += r.report.utility;
        mean.throughput_value += r.report.throughput_value;
        mean.fairness += r.report.fairness;
        mean.delivery += r.report.delivery;
        mean.spatial_reuse += r.report.spatial_reuse;
        lifetime += r.report.lifetime_slots;
    }
    double n = static_cast<double>(rows.size());
    mean.utility /= n;
    mean.throughput_value /= n;
    mean.fairness /= n;
    mean.delivery /= n;
    mean.spatial_reuse /= n;
    mean.lifetime_slots = static_cast<int>(lifetime / n);
    return mean;
}

std::unique_ptr<policy::Policy> make_policy(const std::string& name, const io::Model* model,
                                            std::unique_ptr<neural::PolicyNet>& net_holder) {
    if (name == "icrl") {
        if (!model) throw io::ArtifactError("policy 'icrl' requires a model checkpoint");
        net_holder =
            std::make_unique<neural::PolicyNet>(neural::PolicyNet::from_params(model->arch,
                                                                               model->params));
        return std::make_unique<policy::NetPolicy>(*net_holder);
    }
    return baselines::make_baseline(name);
}

} // namespace

io::Model run_train(const config::RunConfig& cfg, const std::string& out_dir, std::uint64_t seed) {
    io::ensure_directory(out_dir);
    env::Environment environment = config::make_environment(cfg.scenario);

    std::unique_ptr<curriculum::Controller> controller;
    if (cfg.curriculum.present && cfg.curriculum.u_th) {
        controller = std::make_unique<curriculum::Controller>(*cfg.curriculum.u_th,
                                                              cfg.curriculum.learning_factor,
                                                              cfg.curriculum.epsilon_max,
                                                              cfg.scenario.malfunction.train_rate);
    }
    marl::TrainResult result;
    try {
        result = marl::train(environment, cfg.trainer, seed, cfg.scenario.malfunction.train_rate,
                             cfg.scenario.malfunction.train_mode, controller.get());
    } catch (const marl::TrainingDiverged& ex) {
        io::write_text_file((fs::path(out_dir) / "divergence.txt").string(),
                            std::string(ex.what()) + "\n");
        throw;
    }

    write_training_log((fs::path(out_dir) / "training_log.csv").string(), result);
    io::Model model = model_from_train(cfg, result, seed);
    io::save_model((fs::path(out_dir) / "model").string(), model);
    io::write_manifest(out_dir, io::make_manifest("train", config::to_json(cfg), seed, 1,
                                                  {"training_log.csv", "model/checkpoint.json",
                                                   "model/params.bin"}));
    return model;
}

void run_sweep(const config::RunConfig& cfg, const std::string& out_dir, std::uint64_t seed,
               int workers) {
    if (!cfg.curriculum.present) {
        throw config::ConfigError("sweep: config has no curriculum section");
    }
    io::ensure_directory(out_dir);

    curriculum::EnvFactory factory = [&cfg]() { return config::make_environment(cfg.scenario); };
    curriculum::Bounds bounds;
    if (cfg.curriculum.bounds) {
        bounds = *cfg.curriculum.bounds;
    } else {
        bounds = curriculum::calibrate_bounds(factory, cfg.trainer, cfg.curriculum.n_eva,
                                              derive_seed(seed, 0xB0B0ull));
    }

    curriculum::SweepResult sweep = curriculum::grid_search(
        factory, cfg.trainer, cfg.curriculum.grid, bounds, cfg.curriculum.n_eva,
        cfg.curriculum.epsilon_max, cfg.scenario.malfunction.eval_rate,
        cfg.scenario.malfunction.eval_mode, cfg.scenario.malfunction.train_mode, seed, workers);

    io::CsvWriter csv((fs::path(out_dir) / "sweep.csv").string());
    csv.header({"u_th", "learning_factor", "status", "mean_reward", "final_epsilon",
                "mean_utility"});
    for (const curriculum::CellResult& cell : sweep.cells) {
        csv.row({io::format_double(cell.u_th), io::format_double(cell.gamma_lf),
                 cell.ok ? "ok" : "failed", cell.ok ? io::format_double(cell.mean_reward) : "",
                 cell.ok ? io::format_double(cell.final_epsilon) : "",
                 cell.ok ? io::format_double(cell.mean_utility) : ""});
    }
    csv.flush();

    nlohmann::json manifest = io::make_manifest("sweep", config::to_json(cfg), seed, workers,
                                                {"sweep.csv", "best_model/checkpoint.json",
                                                 "best_model/params.bin"});
    manifest["bounds"] = {{"u_min", bounds.u_min}, {"u_max", bounds.u_max}};
    manifest["cell_seeds"] = nlohmann::json::array();
    for (std::size_t i = 0; i < sweep.cells.size(); ++i) {
        manifest["cell_seeds"].push_back(derive_seed(seed, 0xCE11ull + i));
    }

    if (sweep.best_index >= 0) {
        const curriculum::CellResult& best =
            sweep.cells[static_cast<std::size_t>(sweep.best_index)];
        io::Model model = model_from_train(cfg, best.train, seed);
        model.metadata["u_th"] = best.u_th;
        model.metadata["learning_factor"] = best.gamma_lf;
        io::save_model((fs::path(out_dir) / "best_model").string(), model);
        manifest["best_cell"] = {{"u_th", best.u_th},
                                 {"learning_factor", best.gamma_lf},
                                 {"mean_reward", best.mean_reward}};
    } else {
        manifest["best_cell"] = nullptr;
    }
    io::write_manifest(out_dir, manifest);
}

void run_eval(const config::RunConfig& cfg, const io::Model* model, const EvalOptions& opts,
              const std::string& out_dir, std::uint64_t seed) {
    if (opts.episodes < 1) throw config::ConfigError("eval: episodes must be >= 1");
    io::ensure_directory(out_dir);

    std::unique_ptr<neural::PolicyNet> net_holder;
    std::unique_ptr<policy::Policy> pi = make_policy(opts.policy, model, net_holder);
    if (opts.policy == "icrl") {
        env::Environment probe = config::make_environment(cfg.scenario);
        if (model->arch.input != probe.observation_width() ||
            model->arch.actions != probe.actions().size()) {
            throw io::ArtifactError("eval: checkpoint architecture does not match the scenario");
        }
    }

    std::vector<EpisodeRow> rows = evaluate_policy(cfg, *pi, opts.episodes, seed);

    io::CsvWriter csv((fs::path(out_dir) / "episodes.csv").string());
    csv.header({"episode", "seed", "utility", "throughput", "fairness", "delivery_ratio",
                "spatial_reuse", "lifetime_slots"});
    for (const EpisodeRow& r : rows) {
        csv.row({std::to_string(r.episode), std::to_string(r.seed),
                 io::format_double(r.report.utility), io::format_double(r.report.throughput_value),
                 io::format_double(r.report.fairness), io::format_double(r.report.delivery),
                 io::format_double(r.report.spatial_reuse),
                 std::to_string(r.report.lifetime_slots)});
    }
    csv.flush();

    metrics::EpisodeReport mean = mean_report(rows);
    nlohmann::json agg = {{"format", 1},
                          {"policy", opts.policy},
                          {"episodes", opts.episodes},
                          {"seed", seed},
                          {"mean",
                           {{"utility", mean.utility},
                            {"throughput", mean.throughput_value},
                            {"fairness", mean.fairness},
                            {"delivery_ratio", mean.delivery},
                            {"spatial_reuse", mean.spatial_reuse},
                            {"lifetime_slots", mean.lifetime_slots}}}};
    io::write_text_file((fs::path(out_dir) / "aggregate.json").string(), agg.dump(2) + "\n");

    std::vector<std::string> artifacts = {"episodes.csv", "aggregate.json"};
    if (opts.write_trace) {
        env::Environment environment = config::make_environment(cfg.scenario);
        pi = make_policy(opts.policy, model, net_holder);
        std::vector<std::vector<std::string>> trace_rows;
        for (int i = 0; i < opts.episodes; ++i) {
            std::uint64_t ep_seed = derive_seed(seed, 0xE0A1ull + static_cast<std::uint64_t>(i));
            policy::Rollout r = policy::run_episode(environment, *pi, ep_seed,
                                                    cfg.scenario.malfunction.eval_rate,
                                                    cfg.scenario.malfunction.eval_mode);
            io::append_trace_rows(trace_rows, i + 1, r.trace);
        }
        io::CsvWriter trace_csv((fs::path(out_dir) / "trace.csv").string());
        trace_csv.header({"episode", "slot", "tx", "rx", "power_w", "sinr_db", "received"});
        for (const auto& row : trace_rows) trace_csv.row(row);
        trace_csv.flush();
        artifacts.push_back("trace.csv");
    }
    nlohmann::json manifest =
        io::make_manifest("eval", config::to_json(cfg), seed, 1, artifacts);
    manifest["policy"] = opts.policy;
    manifest["episodes"] = opts.episodes;
    io::write_manifest(out_dir, manifest);
}

void run_compare(const config::RunConfig& cfg, const io::Model& model, int episodes,
                 const std::string& out_dir, std::uint64_t seed) {
    if (episodes < 1) throw config::ConfigError("compare: episodes must be >= 1");
    io::ensure_directory(out_dir);

    const std::vector<std::string> names = {"icrl", "epa", "olpa", "rpa", "solpa"};
    io::CsvWriter csv((fs::path(out_dir) / "compare.csv").string());
    csv.header({"policy", "utility", "throughput", "fairness", "delivery_ratio", "spatial_reuse"});
    for (const std::string& name : names) {
        std::unique_ptr<neural::PolicyNet> net_holder;
        std::unique_ptr<policy::Policy> pi = make_policy(name, &model, net_holder);
        // Identical episode seeds across policies.
        std::vector<EpisodeRow> rows = evaluate_policy(cfg, *pi, episodes, seed);
        metrics::EpisodeReport mean = mean_report(rows);
        csv.row({name, io::format_double(mean.utility), io::format_double(mean.throughput_value),
                 io::format_double(mean.fairness), io::format_double(mean.delivery),
                 io::format_double(mean.spatial_reuse)});
    }
    csv.flush();

    nlohmann::json manifest =
        io::make_manifest("compare", config::to_json(cfg), seed, 1, {"compare.csv"});
    manifest["episodes"] = episodes;
    io::write_manifest(out_dir, manifest);
}

} // namespace uwjsa::runner
