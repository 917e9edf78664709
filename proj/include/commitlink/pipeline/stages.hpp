#pragma once

#include "commitlink/pipeline/config.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace commitlink::pipeline {

/// Content keys of every stage. Each key hashes the settings the stage reads
/// together with the key of the stage it consumes, so a stage directory is
/// reused only by runs that would produce the same artifacts.
struct StageKeys {
    std::string ingest;
    std::string coverage;
    std::string retrieve;
    std::string train;
    std::string rerank;
    std::string evaluate;
};

/// Hashes input files, so it throws IoError when one is unreadable.
StageKeys stage_keys(const RunConfig& config);

/// output_dir/<stage>/<key>.
std::filesystem::path stage_dir(const RunConfig& config, std::string_view stage, const StageKeys& keys);

/// Each command writes its artifacts, records itself in the manifest and
/// returns a summary of counts. Missing prerequisites throw
/// PrerequisiteError naming the artifact and the command that produces it.
nlohmann::json cmd_ingest(const RunConfig& config);
nlohmann::json cmd_coverage(const RunConfig& config);
nlohmann::json cmd_retrieve(const RunConfig& config);
nlohmann::json cmd_train(const RunConfig& config);
nlohmann::json cmd_rerank(const RunConfig& config);
nlohmann::json cmd_evaluate(const RunConfig& config);

/// ingest, coverage, retrieve, train, rerank, evaluate in order.
nlohmann::json cmd_all(const RunConfig& config);

} // namespace commitlink::pipeline
