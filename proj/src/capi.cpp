#include "uwjsa.h"

#include "config.hpp"
#include "io.hpp"
#include "runner.hpp"

#include <string>

struct uwjsa_config {
    uwjsa::config::RunConfig cfg;
};

struct uwjsa_model {
    uwjsa::io::Model model;
};

namespace {

thread_local std::string g_last_error;

uwjsa_rc fail(uwjsa_rc rc, const char* what) {
    g_last_error = what;
    return rc;
}

template <class Fn>
uwjsa_rc guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return UWJSA_OK;
    } catch (const uwjsa::config::ConfigError& ex) {
        return fail(UWJSA_ERR_CONFIG, ex.what());
    } catch (const uwjsa::io::ArtifactError& ex) {
        return fail(UWJSA_ERR_ARTIFACT, ex.what());
    } catch (const std::exception& ex) {
        return fail(UWJSA_ERR_RUNTIME, ex.what());
    } catch (...) {
        return fail(UWJSA_ERR_RUNTIME, "unknown error");
    }
}

} // namespace

extern "C" {

const char* uwjsa_version(void) { return "0.1.0"; }

const char* uwjsa_last_error(void) { return g_last_error.c_str(); }

uwjsa_rc uwjsa_config_load(const char* path, uwjsa_config** out) {
    if (!path || !out) return fail(UWJSA_ERR_CONFIG, "null argument");
    return guarded([&]() { *out = new uwjsa_config{uwjsa::config::load_file(path)}; });
}

uwjsa_rc uwjsa_config_parse(const char* json_text, uwjsa_config** out) {
    if (!json_text || !out) return fail(UWJSA_ERR_CONFIG, "null argument");
    return guarded([&]() { *out = new uwjsa_config{uwjsa::config::parse_text(json_text)}; });
}

void uwjsa_config_free(uwjsa_config* cfg) { delete cfg; }

uwjsa_rc uwjsa_train(const uwjsa_config* cfg, const char* out_dir, uint64_t seed,
                     uwjsa_model** out_model) {
    if (!cfg || !out_dir) return fail(UWJSA_ERR_CONFIG, "null argument");
    return guarded([&]() {
        uwjsa::io::Model m = uwjsa::runner::run_train(cfg->cfg, out_dir, seed);
        if (out_model) *out_model = new uwjsa_model{std::move(m)};
    });
}

uwjsa_rc uwjsa_sweep(const uwjsa_config* cfg, const char* out_dir, uint64_t seed, int workers) {
    if (!cfg || !out_dir) return fail(UWJSA_ERR_CONFIG, "null argument");
    return guarded([&]() { uwjsa::runner::run_sweep(cfg->cfg, out_dir, seed, workers); });
}

uwjsa_rc uwjsa_model_load(const char* path, uwjsa_model** out) {
    if (!path || !out) return fail(UWJSA_ERR_ARTIFACT, "null argument");
    return guarded([&]() { *out = new uwjsa_model{uwjsa::io::load_model(path)}; });
}

uwjsa_rc uwjsa_model_save(const uwjsa_model* model, const char* dir) {
    if (!model || !dir) return fail(UWJSA_ERR_ARTIFACT, "null argument");
    return guarded([&]() { uwjsa::io::save_model(dir, model->model); });
}

void uwjsa_model_free(uwjsa_model* model) { delete model; }

uwjsa_rc uwjsa_eval(const uwjsa_config* cfg, const uwjsa_model* model, const char* policy,
                    int episodes, uint64_t seed, const char* out_dir, int write_trace) {
    if (!cfg || !policy || !out_dir) return fail(UWJSA_ERR_CONFIG, "null argument");
    return guarded([&]() {
        uwjsa::runner::EvalOptions opts;
        opts.policy = policy;
        opts.episodes = episodes;
        opts.write_trace = write_trace != 0;
        uwjsa::runner::run_eval(cfg->cfg, model ? &model->model : nullptr, opts, out_dir, seed);
    });
}

uwjsa_rc uwjsa_compare(const uwjsa_config* cfg, const uwjsa_model* model, int episodes,
                       uint64_t seed, const char* out_dir) {
    if (!cfg || !model || !out_dir) return fail(UWJSA_ERR_CONFIG, "null argument");
    return guarded(
        [&]() { uwjsa::runner::run_compare(cfg->cfg, model->model, episodes, out_dir, seed); });
}

} // extern "C"
