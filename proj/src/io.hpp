#pragma once

#include "metrics.hpp"
#include "neural.hpp"

#include <string>
#include <vector>

#include <json.hpp>

namespace uwjsa::io {

struct ArtifactError : std::runtime_error {
    explicit ArtifactError(const std::string& what) : std::runtime_error(what) {}
};

// Locale-independent fixed formatting for all numeric output.
std::string format_double(double v);
std::string format_float(float v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Trained model on disk: checkpoint.json (architecture, named slices, format
// version, metadata) next to params.bin (flat little-endian float32).
struct Model {
    neural::Arch arch;
    std::vector<float> params;
    nlohmann::json metadata; // seed, selected episode, scenario summary
};

void save_model(const std::string& dir, const Model& model);
Model load_model(const std::string& dir_or_manifest);

// Simple CSV sink; every cell is preformatted text.
class CsvWriter {
  public:
    explicit CsvWriter(std::string path) : path_(std::move(path)) {}
    void header(const std::vector<std::string>& names);
    void row(const std::vector<std::string>& cells);
    void flush();

  private:
    std::string path_;
    std::string buffer_;
};

// Run manifest: config snapshot, seeds, artifact paths, tool version and wall
// clock. The only file where timestamps appear.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config_snapshot,
                             std::uint64_t seed, int workers,
                             const std::vector<std::string>& artifacts);
void write_manifest(const std::string& out_dir, const nlohmann::json& manifest);

// Episode trace export: one row per (slot, tx, rx) with power, SINR in dB and
// the reception flag; `episode` column prefixes multi-episode files.
void append_trace_rows(std::vector<std::vector<std::string>>& rows, int episode,
                       const metrics::EpisodeTrace& trace);

void ensure_directory(const std::string& dir);

} // namespace uwjsa::io
