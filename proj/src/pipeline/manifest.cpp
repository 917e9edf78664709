#include "commitlink/pipeline/manifest.hpp"

#include "commitlink/common/errors.hpp"

#include <fstream>

namespace commitlink::pipeline {

namespace fs = std::filesystem;

void write_json_file(const fs::path& path, const nlohmann::json& value) {
    fs::create_directories(path.parent_path());
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out << value.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
        if (!out) {
            throw IoError("failed writing " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

std::string dump_line(const nlohmann::json& value) {
    return value.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void record_stage(const RunConfig& config, const StageRecord& record) {
    const auto path = config.output_dir / "manifest.json";
    const auto fingerprint = config.fingerprint();
    nlohmann::json manifest;
    if (fs::exists(path)) {
        try {
            manifest = read_json_file(path);
        } catch (const Error&) {
            manifest = nlohmann::json();
        }
    }
    if (!manifest.is_object() || manifest.value("config_fingerprint", std::string()) != fingerprint) {
        manifest = nlohmann::json{{"stages", nlohmann::json::object()}};
    }
    manifest["tool_version"] = COMMITLINK_VERSION;
    manifest["config_fingerprint"] = fingerprint;
    manifest["stages"][record.stage] = {{"key", record.key},
                                        {"dir", fs::relative(record.dir, config.output_dir).generic_string()},
                                        {"seconds", record.seconds},
                                        {"counts", record.counts}};
    write_json_file(path, manifest);
}

} // namespace commitlink::pipeline
