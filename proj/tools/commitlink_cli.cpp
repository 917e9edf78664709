#include "commitlink/common/errors.hpp"
#include "commitlink/pipeline/config.hpp"
#include "commitlink/pipeline/manifest.hpp"
#include "commitlink/pipeline/stages.hpp"

#include "CLI11.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <functional>
#include <iostream>
#include <map>

namespace {

using commitlink::pipeline::RunConfig;
using Command = std::function<nlohmann::json(const RunConfig&)>;

int run(const std::string& name, const Command& command, const std::string& config_path,
        const commitlink::pipeline::ConfigOverrides& overrides) {
    try {
        const auto config = commitlink::pipeline::load_config(config_path, overrides);
        spdlog::info("{}: config fingerprint {}", name, config.fingerprint().substr(0, 16));
        command(config);
        std::cout << commitlink::pipeline::dump_line(
                         {{"command", name}, {"manifest", (config.output_dir / "manifest.json").string()}})
                  << '\n';
        return 0;
    } catch (const commitlink::ConfigError& e) {
        spdlog::error("configuration error: {}", e.what());
        return 1;
    } catch (const commitlink::PrerequisiteError& e) {
        spdlog::error("missing prerequisite: {}", e.what());
        return 1;
    } catch (const commitlink::DataError& e) {
        spdlog::error("data error: {}", e.what());
        return 2;
    } catch (const commitlink::IoError& e) {
        spdlog::error("i/o error: {}", e.what());
        return 2;
    } catch (const commitlink::RemoteError& e) {
        spdlog::error("remote endpoint error: {}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("commitlink"));
    spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");

    CLI::App app{"Issue-commit link recovery: ingest, retrieve, rerank and evaluate"};
    app.set_version_flag("--version", std::string(COMMITLINK_VERSION));
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    bool verbose = false;
    app.add_option("--config", config_path, "Run configuration (JSON)")
                           ->required()
                           ->check(CLI::ExistingFile);
    auto* output_opt = app.add_option("--output", output_dir, "Output directory (overrides the config)");
    auto* seed_opt = app.add_option("--seed", seed, "Global seed (overrides the config)");
    auto* workers_opt = app.add_option("--workers", workers, "Worker threads; 0 = number of processing units");
    app.add_flag("--verbose,-v", verbose, "Debug logging");

    const std::map<std::string, std::pair<std::string, Command>> commands{
        {"ingest", {"Validate inputs, filter commits, scrub documents, mine true links",
                    commitlink::pipeline::cmd_ingest}},
        {"coverage", {"Tabulate true-link coverage of each configured window policy",
                      commitlink::pipeline::cmd_coverage}},
        {"retrieve", {"Build per-issue candidate pools and ranked lists for every retriever",
                      commitlink::pipeline::cmd_retrieve}},
        {"train", {"Split issues chronologically and train the reranker models", commitlink::pipeline::cmd_train}},
        {"rerank", {"Rerank the top candidates of every test issue", commitlink::pipeline::cmd_rerank}},
        {"evaluate", {"Score ranked lists and write report tables", commitlink::pipeline::cmd_evaluate}},
        {"all", {"Run every stage in order", commitlink::pipeline::cmd_all}},
    };
    // Global flags are accepted after the subcommand too.
    app.fallthrough();
    for (const auto& [name, entry] : commands) {
        app.add_subcommand(name, entry.first);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int status = app.exit(e);
        return status == 0 ? 0 : 1;
    }
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

    commitlink::pipeline::ConfigOverrides overrides;
    if (*output_opt) {
        overrides.output_dir = output_dir;
    }
    if (*seed_opt) {
        overrides.seed = seed;
    }
    if (*workers_opt) {
        overrides.workers = workers;
    }
    for (const auto& [name, entry] : commands) {
        if (app.got_subcommand(name)) {
            return run(name, entry.second, config_path, overrides);
        }
    }
    return 1;
}
