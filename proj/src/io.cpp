#include "io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace uwjsa::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string format_float(float v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArtifactError("cannot write " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot read " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ArtifactError("cannot create directory " + dir + ": " + ec.message());
}

namespace {

// Params are stored little-endian; byte-swap on big-endian hosts.
bool host_little_endian() {
    const std::uint16_t probe = 1;
    return *reinterpret_cast<const std::uint8_t*>(&probe) == 1;
}

void swap_to_little(std::vector<float>& data) {
    if (host_little_endian()) return;
    for (float& f : data) {
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        u = __builtin_bswap32(u);
        std::memcpy(&f, &u, 4);
    }
}

} // namespace

void save_model(const std::string& dir, const Model& model) {
    ensure_directory(dir);
    neural::Net<float> shape(model.arch); // for slice layout
    if (model.params.size() != shape.param_count()) {
        throw ArtifactError("save_model: parameter count does not match architecture");
    }
    nlohmann::json j;
    j["format"] = 1;
    j["kind"] = "uwjsa_model";
    j["dtype"] = "f32le";
    j["arch"] = {{"input", model.arch.input},
                 {"hidden", model.arch.hidden},
                 {"actions", model.arch.actions}};
    j["slices"] = nlohmann::json::array();
    for (const neural::Slice& s : shape.slices()) {
        j["slices"].push_back(
            {{"name", s.name}, {"offset", s.offset}, {"rows", s.rows}, {"cols", s.cols}});
    }
    j["params_file"] = "params.bin";
    j["init_scheme"] = "fan_in_uniform";
    j["metadata"] = model.metadata;
    write_text_file((fs::path(dir) / "checkpoint.json").string(), j.dump(2) + "\n");

    std::vector<float> data = model.params;
    swap_to_little(data);
    std::ofstream bin((fs::path(dir) / "params.bin").string(), std::ios::binary);
    if (!bin) throw ArtifactError("save_model: cannot write params.bin in " + dir);
    bin.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
}

Model load_model(const std::string& dir_or_manifest) {
    fs::path manifest_path(dir_or_manifest);
    if (fs::is_directory(manifest_path)) manifest_path /= "checkpoint.json";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(manifest_path.string()));
    } catch (const nlohmann::json::exception& ex) {
        throw ArtifactError("load_model: invalid checkpoint manifest: " + std::string(ex.what()));
    }
    if (j.value("kind", "") != "uwjsa_model" || j.value("format", 0) != 1 ||
        j.value("dtype", "") != "f32le") {
        throw ArtifactError("load_model: unrecognized checkpoint format");
    }
    Model m;
    m.arch.input = j.at("arch").at("input").get<int>();
    m.arch.hidden = j.at("arch").at("hidden").get<int>();
    m.arch.actions = j.at("arch").at("actions").get<int>();
    m.metadata = j.value("metadata", nlohmann::json::object());

    fs::path bin_path = manifest_path.parent_path() / j.value("params_file", "params.bin");
    std::ifstream bin(bin_path.string(), std::ios::binary);
    if (!bin) throw ArtifactError("load_model: cannot read " + bin_path.string());
    neural::Net<float> shape(m.arch);
    m.params.resize(shape.param_count());
    bin.read(reinterpret_cast<char*>(m.params.data()),
             static_cast<std::streamsize>(m.params.size() * sizeof(float)));
    if (static_cast<std::size_t>(bin.gcount()) != m.params.size() * sizeof(float)) {
        throw ArtifactError("load_model: params.bin is truncated");
    }
    swap_to_little(m.params);
    return m;
}

void CsvWriter::header(const std::vector<std::string>& names) { row(names); }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += cells[i];
    }
    buffer_ += '\n';
}

void CsvWriter::flush() { write_text_file(path_, buffer_); }

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config_snapshot,
                             std::uint64_t seed, int workers,
                             const std::vector<std::string>& artifacts) {
    nlohmann::json j;
    j["uwjsa_manifest"] = true;
    j["format"] = 1;
    j["tool_version"] = "0.1.0";
    j["command"] = command;
    j["seed"] = seed;
    j["workers"] = workers;
    j["config"] = config_snapshot;
    j["artifacts"] = artifacts;
    auto now = std::chrono::system_clock::now().time_since_epoch();
    j["wall_clock_unix_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    return j;
}

void write_manifest(const std::string& out_dir, const nlohmann::json& manifest) {
    write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

void append_trace_rows(std::vector<std::vector<std::string>>& rows, int episode,
                       const metrics::EpisodeTrace& trace) {
    for (const world::SlotOutcome& out : trace.outcomes) {
        for (const auto& p : out.pairs) {
            if (!p.scheduled) continue;
            rows.push_back({std::to_string(episode), std::to_string(out.slot),
                            std::to_string(p.tx_id), std::to_string(p.rx_id),
                            format_double(p.tx_power_w),
                            p.sinr > 0.0 ? format_double(acoustics::linear_to_db(p.sinr)) : "-inf",
                            p.received ? "1" : "0"});
        }
    }
}

} // namespace uwjsa::io
