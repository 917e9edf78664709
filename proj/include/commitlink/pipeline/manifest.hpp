#pragma once

#include "commitlink/pipeline/config.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace commitlink::pipeline {

/// One completed stage run, as recorded in output_dir/manifest.json.
struct StageRecord {
    std::string stage;
    std::string key;
    std::filesystem::path dir;
    double seconds = 0.0;
    nlohmann::json counts = nlohmann::json::object();
};

/// Merges `record` into output_dir/manifest.json. The manifest carries the
/// tool version and config fingerprint, never credentials; records from a
/// different fingerprint are discarded.
void record_stage(const RunConfig& config, const StageRecord& record);

/// Writes JSON atomically (temp file + rename), pretty-printed, with a
/// trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Canonical single-line JSON, as used for JSONL artifacts.
std::string dump_line(const nlohmann::json& value);

} // namespace commitlink::pipeline
