#include "doctest.h"
#include "synthetic.hpp"

#include "commitlink/common/errors.hpp"
#include "commitlink/pipeline/config.hpp"
#include "commitlink/pipeline/manifest.hpp"
#include "commitlink/pipeline/stages.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace commitlink;
using namespace commitlink::pipeline;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixture = COMMITLINK_FIXTURE_DIR;

json fixture_json() { return read_json_file(kFixture / "config.json"); }

/// Fixture config writing into a fresh temporary output directory.
RunConfig fixture_config(const std::string& name, json j = fixture_json()) {
    const auto out = test_support::temp_dir(name);
    j["output_dir"] = out.string();
    return parse_config(j, kFixture);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Relative path -> bytes for every file under `dir`.
std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) {
            out[fs::relative(e.path(), dir).string()] = slurp(e.path());
        }
    }
    return out;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + COMMITLINK_CLI + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config parsing is strict") {
    CHECK_NOTHROW(parse_config(fixture_json(), kFixture));
    auto unknown = fixture_json();
    unknown["retreivers"] = json::array();
    CHECK_THROWS_AS(parse_config(unknown, kFixture), ConfigError);
    auto missing = fixture_json();
    missing.erase("projects");
    CHECK_THROWS_AS(parse_config(missing, kFixture), ConfigError);
    auto bad_kind = fixture_json();
    bad_kind["retrievers"][0]["kind"] = "bm26";
    CHECK_THROWS_AS(parse_config(bad_kind, kFixture), ConfigError);
    auto bad_name = fixture_json();
    bad_name["projects"][0]["id"] = "../escape";
    CHECK_THROWS_AS(parse_config(bad_name, kFixture), ConfigError);
    auto dup = fixture_json();
    dup["retrievers"].push_back(dup["retrievers"][0]);
    CHECK_THROWS_AS(parse_config(dup, kFixture), ConfigError);
    auto bad_ks = fixture_json();
    bad_ks["evaluation"]["ks"] = json::array({0});
    CHECK_THROWS_AS(parse_config(bad_ks, kFixture), ConfigError);
    auto bad_params = fixture_json();
    bad_params["rerankers"][0]["params"] = {{"n_trees", 3}};
    CHECK_THROWS_AS(parse_config(bad_params, kFixture), ConfigError);
    CHECK_THROWS_AS(load_config(kFixture / "missing.json"), ConfigError);
}

TEST_CASE("fingerprint tracks results-affecting settings only") {
    auto a = fixture_json();
    auto b = a;
    b["output_dir"] = "/elsewhere";
    b["workers"] = 3;
    CHECK(parse_config(a, kFixture).fingerprint() == parse_config(b, kFixture).fingerprint());
    b["seed"] = 8;
    CHECK(parse_config(a, kFixture).fingerprint() != parse_config(b, kFixture).fingerprint());
    const auto loaded = load_config(kFixture / "config.json", ConfigOverrides{99, fs::path("out-x"), 2});
    CHECK(loaded.seed == 99);
    CHECK(loaded.workers == 2);
    CHECK(loaded.output_dir.is_absolute());
}

TEST_CASE("ingest reports fixture quality and is reproducible") {
    const auto config = fixture_config("pipeline_ingest");
    const auto counts = cmd_ingest(config);
    CHECK(counts.at("fixture").at("merge_commits_excluded") == 3);
    CHECK(counts.at("fixture").at("links") == 8);
    CHECK(counts.at("fixture").at("linked_issues") == 6);
    const auto dir = stage_dir(config, "ingest", stage_keys(config));
    const auto quality = read_json_file(dir / "quality.json").at("fixture");
    CHECK(quality.at("links_to_excluded_commits") == 1);
    CHECK(fs::exists(dir / "stage.json"));
    const auto first = tree(dir);
    cmd_ingest(config);
    CHECK(tree(dir) == first);
    const auto manifest = read_json_file(config.output_dir / "manifest.json");
    CHECK(manifest.dump().find("token") == std::string::npos);
}

TEST_CASE("ingest rejects an empty issue file") {
    const auto dir = test_support::temp_dir("pipeline_empty");
    std::ofstream(dir / "issues.jsonl") << "";
    fs::copy_file(kFixture / "commits.jsonl", dir / "commits.jsonl");
    auto j = fixture_json();
    j["output_dir"] = (dir / "out").string();
    CHECK_THROWS_AS(cmd_ingest(parse_config(j, dir)), DataError);
}

TEST_CASE("stages need their prerequisites") {
    const auto config = fixture_config("pipeline_prereq");
    CHECK_THROWS_AS(cmd_coverage(config), PrerequisiteError);
    cmd_ingest(config);
    CHECK_THROWS_AS(cmd_train(config), PrerequisiteError);
    CHECK_THROWS_AS(cmd_rerank(config), PrerequisiteError);
    CHECK_THROWS_AS(cmd_evaluate(config), PrerequisiteError);
    try {
        cmd_train(config);
    } catch (const PrerequisiteError& e) {
        CHECK(std::string(e.what()).find("commitlink retrieve") != std::string::npos);
    }
}

TEST_CASE("coverage: the hybrid window covers more links than creation-only") {
    const auto config = fixture_config("pipeline_coverage");
    cmd_ingest(config);
    const auto counts = cmd_coverage(config);
    const auto& rows = counts.at("policies");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].at("coverage").get<double>() == doctest::Approx(0.875));
    CHECK(rows[1].at("coverage").get<double>() == doctest::Approx(1.0));
}

TEST_CASE("seeded training is reproducible and missing lists abort training") {
    const auto config = fixture_config("pipeline_train");
    cmd_ingest(config);
    cmd_retrieve(config);
    cmd_train(config);
    const auto keys = stage_keys(config);
    const auto train_dir = stage_dir(config, "train", keys);
    const auto model = slurp(train_dir / "models" / "forest.json");
    REQUIRE_FALSE(model.empty());
    cmd_train(config);
    CHECK(slurp(train_dir / "models" / "forest.json") == model);

    cmd_rerank(config);
    const auto summary = cmd_evaluate(config);
    CHECK_FALSE(summary.empty());
    CHECK(fs::exists(stage_dir(config, "evaluate", keys) / "tables.txt"));

    fs::remove(stage_dir(config, "retrieve", keys) / "lists" / "rrf.jsonl");
    CHECK_THROWS_AS(cmd_train(config), PrerequisiteError);
}

TEST_CASE("cli exit codes distinguish config, prerequisite and success") {
    const auto out = test_support::temp_dir("pipeline_cli");
    const auto config = (kFixture / "config.json").string();
    CHECK(run_cli("--version") == 0);
    CHECK(run_cli("--config /nonexistent.json ingest") != 0);
    CHECK(run_cli("--config \"" + config + "\" --output \"" + out.string() + "\" train") == 1);
    CHECK(run_cli("--config \"" + config + "\" --output \"" + out.string() + "\" ingest") == 0);
    const auto bad = out / "bad.json";
    auto j = fixture_json();
    j["retrievers"][0]["kind"] = "nope";
    std::ofstream(bad) << j.dump();
    fs::copy_file(kFixture / "issues.jsonl", out / "issues.jsonl");
    fs::copy_file(kFixture / "commits.jsonl", out / "commits.jsonl");
    CHECK(run_cli("--config \"" + bad.string() + "\" ingest") == 1);
}
