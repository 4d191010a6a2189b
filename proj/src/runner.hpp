#pragma once

#include "config.hpp"
#include "io.hpp"

#include <string>

namespace uwjsa::runner {

// Runs training per the config, writes training_log.csv, the selected model
// checkpoint under <out_dir>/model and the run manifest. When the config
// carries a curriculum section with an explicit u_th, the malfunction-rate
// adjustment hook is active during training.
io::Model run_train(const config::RunConfig& cfg, const std::string& out_dir, std::uint64_t seed);

// Grid search over (u_th, learning factor); writes sweep.csv, the best cell's
// checkpoint under <out_dir>/best_model and the manifest with per-cell seeds.
void run_sweep(const config::RunConfig& cfg, const std::string& out_dir, std::uint64_t seed,
               int workers);

struct EvalOptions {
    std::string policy = "icrl"; // icrl | epa | olpa | rpa | solpa
    int episodes = 100;
    bool write_trace = false;
};

// Evaluates the model or a baseline over seeded episodes; writes
// episodes.csv, aggregate.json and the manifest.
void run_eval(const config::RunConfig& cfg, const io::Model* model, const EvalOptions& opts,
              const std::string& out_dir, std::uint64_t seed);

// Evaluates the trained model plus the four baselines under identical
// episode seeds; writes compare.csv and the manifest.
void run_compare(const config::RunConfig& cfg, const io::Model& model, int episodes,
                 const std::string& out_dir, std::uint64_t seed);

} // namespace uwjsa::runner
