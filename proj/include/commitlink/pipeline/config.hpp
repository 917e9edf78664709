#pragma once

#include "commitlink/common/http.hpp"
#include "commitlink/corpus/records.hpp"
#include "commitlink/rerank/forest.hpp"
#include "commitlink/retrieval/retriever.hpp"
#include "commitlink/temporal/window.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace commitlink::pipeline {

struct ProjectConfig {
    std::string id;
    std::filesystem::path issues;
    std::filesystem::path commits;
    corpus::KeyStyle key_style = corpus::KeyStyle::jira;
    std::vector<std::string> keys;
};

/// Remote endpoint settings; the token is read from `token_env` at use time.
struct RemoteConfig {
    std::string url;
    std::string token_env;
    std::string model;
    int timeout_ms = 60'000;
    int max_retries = 3;
    int backoff_ms = 500;
    int min_interval_ms = 0;
    std::size_t max_concurrency = 4;

    EndpointConfig endpoint() const;
};

enum class EmbeddingProviderKind { hashing, http };

struct EmbeddingConfig {
    EmbeddingProviderKind provider = EmbeddingProviderKind::hashing;
    std::size_t dim = 384;
    std::size_t batch_size = 64;
    std::uint64_t hashing_seed = 0;
    RemoteConfig remote;
};

enum class RerankerType { identity, forest, frlink, llm, pairwise };

std::string_view to_string(RerankerType type);

struct RerankerConfig {
    std::string name;
    RerankerType type = RerankerType::identity;
    rerank::ForestParams forest;
    RemoteConfig remote;
    std::size_t message_budget = 1000;  ///< llm: characters per commit message
};

struct EvaluationConfig {
    std::vector<std::size_t> ks{1, 5, 10, 20, 30, 50};
    double test_ratio = 0.2;
    std::size_t sample_size = 1000;
    std::size_t repeats = 5;
};

struct RunConfig {
    std::filesystem::path config_dir;
    std::vector<ProjectConfig> projects;
    temporal::WindowPolicy window = temporal::WindowPolicy::hybrid(365, 30);
    std::vector<temporal::WindowPolicy> coverage_policies;
    EmbeddingConfig embedding;
    std::vector<retrieval::RetrieverConfig> retrievers;
    std::string candidate_retriever = "rrf";
    std::vector<RerankerConfig> rerankers;
    std::size_t rerank_k = 20;
    std::size_t negatives_per_issue = 10;
    EvaluationConfig evaluation;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    std::size_t workers = 0;  ///< 0 = number of processing units

    const retrieval::RetrieverConfig& retriever(const std::string& name) const;
    bool needs_embeddings() const;
    bool has_reranker(RerankerType type) const;

    /// Every setting that affects results, with paths replaced by the file
    /// names only; credentials, output_dir and workers are left out.
    nlohmann::json canonical() const;
    std::string fingerprint() const;
};

/// Parses a config document. Relative paths resolve against `base_dir`.
/// Unknown keys, missing required keys and invalid values throw ConfigError.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Command-line values that replace the ones in the config file.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;  ///< applied before parsing, so derived seeds follow it
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::size_t> workers;
};

/// Reads and parses a config file, then checks that every referenced input
/// file exists. Throws ConfigError.
RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

} // namespace commitlink::pipeline
