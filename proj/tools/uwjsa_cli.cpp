// Command-line front end; talks to the core exclusively through the C API.

#include <uwjsa.h>

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>

#include <CLI11.hpp>

namespace {

int report(uwjsa_rc rc) {
    if (rc != UWJSA_OK) std::fprintf(stderr, "error: %s\n", uwjsa_last_error());
    return static_cast<int>(rc);
}

struct ConfigHandle {
    uwjsa_config* ptr = nullptr;
    ~ConfigHandle() { uwjsa_config_free(ptr); }
};

struct ModelHandle {
    uwjsa_model* ptr = nullptr;
    ~ModelHandle() { uwjsa_model_free(ptr); }
};

int default_workers() {
    if (const char* env = std::getenv("UWJSA_WORKERS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Underwater joint link scheduling and power allocation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(uwjsa_version()));

    std::string config_path, out_dir, model_path;
    std::uint64_t seed = 1;
    int workers = default_workers();
    int episodes = 100;
    std::string policy = "icrl";
    bool trace = false;

    CLI::App* train = app.add_subcommand("train", "Train a model from a config");
    train->add_option("--config", config_path, "Config or manifest JSON")->required();
    train->add_option("--out", out_dir, "Output directory")->required();
    train->add_option("--seed", seed, "Master seed");

    CLI::App* sweep = app.add_subcommand("sweep", "Curriculum hyper-parameter grid search");
    sweep->add_option("--config", config_path, "Config or manifest JSON")->required();
    sweep->add_option("--out", out_dir, "Output directory")->required();
    sweep->add_option("--seed", seed, "Master seed");
    sweep->add_option("--workers", workers, "Parallel grid cells");

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a model or baseline");
    eval->add_option("--config", config_path, "Config or manifest JSON")->required();
    eval->add_option("--out", out_dir, "Output directory")->required();
    eval->add_option("--model", model_path, "Checkpoint directory (required for icrl)");
    eval->add_option("--policy", policy, "icrl|epa|olpa|rpa|solpa")
        ->check(CLI::IsMember({"icrl", "epa", "olpa", "rpa", "solpa"}));
    eval->add_option("--episodes", episodes, "Evaluation episodes");
    eval->add_option("--seed", seed, "Master seed");
    eval->add_flag("--trace", trace, "Also write the per-slot trace CSV");

    CLI::App* compare = app.add_subcommand("compare", "Model vs all baselines, shared seeds");
    compare->add_option("--config", config_path, "Config or manifest JSON")->required();
    compare->add_option("--out", out_dir, "Output directory")->required();
    compare->add_option("--model", model_path, "Checkpoint directory")->required();
    compare->add_option("--episodes", episodes, "Evaluation episodes");
    compare->add_option("--seed", seed, "Master seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(UWJSA_ERR_CONFIG);
    }

    ConfigHandle cfg;
    if (uwjsa_rc rc = uwjsa_config_load(config_path.c_str(), &cfg.ptr); rc != UWJSA_OK) {
        return report(rc);
    }

    if (train->parsed()) {
        return report(uwjsa_train(cfg.ptr, out_dir.c_str(), seed, nullptr));
    }
    if (sweep->parsed()) {
        return report(uwjsa_sweep(cfg.ptr, out_dir.c_str(), seed, workers));
    }
    if (eval->parsed()) {
        ModelHandle model;
        if (policy == "icrl") {
            if (model_path.empty()) {
                std::fprintf(stderr, "error: --policy icrl requires --model\n");
                return static_cast<int>(UWJSA_ERR_CONFIG);
            }
            if (uwjsa_rc rc = uwjsa_model_load(model_path.c_str(), &model.ptr); rc != UWJSA_OK) {
                return report(rc);
            }
        }
        return report(uwjsa_eval(cfg.ptr, model.ptr, policy.c_str(), episodes, seed,
                                 out_dir.c_str(), trace ? 1 : 0));
    }
    if (compare->parsed()) {
        ModelHandle model;
        if (uwjsa_rc rc = uwjsa_model_load(model_path.c_str(), &model.ptr); rc != UWJSA_OK) {
            return report(rc);
        }
        return report(uwjsa_compare(cfg.ptr, model.ptr, episodes, seed, out_dir.c_str()));
    }
    return static_cast<int>(UWJSA_ERR_CONFIG);
}
