#include "commitlink/pipeline/config.hpp"

#include "commitlink/common/errors.hpp"
#include "commitlink/common/hash.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <initializer_list>
#include <set>

namespace commitlink::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const auto a : allowed) {
            known = known || key == a;
        }
        if (!known) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

/// Names become file and directory names, so they are kept to a safe set.
void check_name(const std::string& name, const std::string& what) {
    const bool ok = !name.empty() && name != "." && name != ".." &&
                    std::all_of(name.begin(), name.end(), [](char ch) {
                        const auto c = static_cast<unsigned char>(ch);
                        return std::isalnum(c) || c == '_' || c == '-' || c == '.' || c == '@';
                    });
    if (!ok) {
        throw ConfigError(what + " '" + name + "' must be non-empty and use only letters, digits, '_', '-', '.', '@'");
    }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::out_of_range&) {
        throw ConfigError(where + ": missing required key '" + key + "'");
    } catch (const json::exception& e) {
        throw ConfigError(where + ": invalid value for '" + key + "': " + e.what());
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (j.contains(key)) {
        out = get<T>(j, key, where);
    }
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

RemoteConfig parse_remote(const json& j, const std::string& where) {
    RemoteConfig r;
    read(j, "url", r.url, where);
    read(j, "token_env", r.token_env, where);
    read(j, "model", r.model, where);
    read(j, "timeout_ms", r.timeout_ms, where);
    read(j, "max_retries", r.max_retries, where);
    read(j, "backoff_ms", r.backoff_ms, where);
    read(j, "min_interval_ms", r.min_interval_ms, where);
    read(j, "max_concurrency", r.max_concurrency, where);
    if (r.timeout_ms <= 0 || r.max_retries < 0 || r.backoff_ms < 0 || r.min_interval_ms < 0 ||
        r.max_concurrency == 0 || r.max_concurrency > 256) {
        throw ConfigError(where + ": invalid endpoint limits");
    }
    return r;
}

json remote_json(const RemoteConfig& r) {
    return {{"url", r.url}, {"token_env", r.token_env}, {"model", r.model}, {"timeout_ms", r.timeout_ms},
            {"max_retries", r.max_retries}, {"backoff_ms", r.backoff_ms}};
}

#define REMOTE_KEYS "url", "token_env", "model", "timeout_ms", "max_retries", "backoff_ms", "min_interval_ms", "max_concurrency"

ProjectConfig parse_project(const json& j, const fs::path& base, std::size_t index) {
    const auto where = "projects[" + std::to_string(index) + "]";
    check_keys(j, {"id", "issues", "commits", "key_style", "keys"}, where);
    ProjectConfig p;
    p.id = get<std::string>(j, "id", where);
    p.issues = resolve(base, get<std::string>(j, "issues", where));
    p.commits = resolve(base, get<std::string>(j, "commits", where));
    const auto style = get<std::string>(j, "key_style", where);
    const auto parsed = corpus::parse_key_style(style);
    if (!parsed) {
        throw ConfigError(where + ": key_style must be 'jira' or 'github'");
    }
    p.key_style = *parsed;
    read(j, "keys", p.keys, where);
    check_name(p.id, where + ": id");
    if (p.key_style == corpus::KeyStyle::jira && p.keys.empty()) {
        throw ConfigError(where + ": jira key style needs at least one project key");
    }
    return p;
}

temporal::WindowPolicy parse_window(const json& j, const std::string& where) {
    try {
        auto policy = j.get<temporal::WindowPolicy>();
        policy.validate();
        return policy;
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

EmbeddingConfig parse_embedding(const json& j) {
    const std::string where = "embedding";
    check_keys(j, {"provider", "dim", "batch_size", "seed", REMOTE_KEYS}, where);
    EmbeddingConfig e;
    const auto provider = j.value("provider", std::string("hashing"));
    if (provider == "hashing") {
        e.provider = EmbeddingProviderKind::hashing;
    } else if (provider == "http") {
        e.provider = EmbeddingProviderKind::http;
    } else {
        throw ConfigError("embedding.provider must be 'hashing' or 'http'");
    }
    read(j, "dim", e.dim, where);
    read(j, "batch_size", e.batch_size, where);
    read(j, "seed", e.hashing_seed, where);
    e.remote = parse_remote(j, where);
    if (e.dim == 0 || e.batch_size == 0) {
        throw ConfigError("embedding: dim and batch_size must be positive");
    }
    if (e.provider == EmbeddingProviderKind::http && e.remote.url.empty()) {
        throw ConfigError("embedding: http provider needs a url");
    }
    return e;
}

retrieval::RetrieverKind parse_kind(const json& j, const char* key, const std::string& where) {
    const auto text = get<std::string>(j, key, where);
    const auto kind = retrieval::parse_retriever_kind(text);
    if (!kind) {
        throw ConfigError(where + ": unknown retriever kind '" + text + "'");
    }
    return *kind;
}

retrieval::RetrieverConfig parse_retriever(const json& j, std::uint64_t seed, std::size_t index) {
    const auto where = "retrievers[" + std::to_string(index) + "]";
    check_keys(j, {"name", "kind", "k", "scope", "params", "sparse", "dense", "rrf_k", "top_n"}, where);
    retrieval::RetrieverConfig r;
    r.name = get<std::string>(j, "name", where);
    r.kind = parse_kind(j, "kind", where);
    read(j, "k", r.k, where);
    if (j.contains("scope")) {
        const auto scope = get<std::string>(j, "scope", where);
        if (scope != "pool" && scope != "global") {
            throw ConfigError(where + ": scope must be 'pool' or 'global'");
        }
        r.scope = scope == "global" ? retrieval::SparseScope::global : retrieval::SparseScope::pool;
    }
    if (j.contains("sparse")) {
        r.sparse = parse_kind(j, "sparse", where);
    }
    if (j.contains("dense")) {
        r.dense = parse_kind(j, "dense", where);
    }
    read(j, "rrf_k", r.rrf_k, where);
    read(j, "top_n", r.top_n, where);
    r.vector.hnsw.seed = r.vector.lsh.seed = r.vector.rp_forest.seed = seed;
    if (j.contains("params")) {
        const auto& p = j.at("params");
        const auto pw = where + ".params";
        check_keys(p, {"k1", "b", "epsilon", "delta", "m", "ef_construction", "ef_search", "nbits", "n_trees",
                       "leaf_size", "search_k_factor", "seed"},
                   pw);
        read(p, "k1", r.bm25.k1, pw);
        read(p, "b", r.bm25.b, pw);
        read(p, "epsilon", r.bm25.epsilon, pw);
        read(p, "delta", r.bm25.delta, pw);
        read(p, "m", r.vector.hnsw.m, pw);
        read(p, "ef_construction", r.vector.hnsw.ef_construction, pw);
        read(p, "ef_search", r.vector.hnsw.ef_search, pw);
        read(p, "nbits", r.vector.lsh.nbits, pw);
        read(p, "n_trees", r.vector.rp_forest.n_trees, pw);
        read(p, "leaf_size", r.vector.rp_forest.leaf_size, pw);
        read(p, "search_k_factor", r.vector.rp_forest.search_k_factor, pw);
        if (p.contains("seed")) {
            const auto s = get<std::uint64_t>(p, "seed", pw);
            r.vector.hnsw.seed = r.vector.lsh.seed = r.vector.rp_forest.seed = s;
        }
        if (r.vector.hnsw.m < 2 || r.vector.hnsw.ef_construction == 0 || r.vector.hnsw.ef_search == 0 ||
            r.vector.lsh.nbits == 0 || r.vector.rp_forest.n_trees == 0 || r.vector.rp_forest.leaf_size == 0 ||
            r.vector.rp_forest.search_k_factor == 0) {
            throw ConfigError(pw + ": index parameters out of range");
        }
    }
    r.validate();
    return r;
}

RerankerConfig parse_reranker(const json& j, std::uint64_t seed, std::size_t index) {
    const auto where = "rerankers[" + std::to_string(index) + "]";
    check_keys(j, {"name", "type", "params", "message_budget", REMOTE_KEYS}, where);
    RerankerConfig r;
    r.name = get<std::string>(j, "name", where);
    const auto type = get<std::string>(j, "type", where);
    bool known = false;
    for (const auto t : {RerankerType::identity, RerankerType::forest, RerankerType::frlink, RerankerType::llm,
                         RerankerType::pairwise}) {
        if (type == to_string(t)) {
            r.type = t;
            known = true;
        }
    }
    if (!known) {
        throw ConfigError(where + ": unknown reranker type '" + type + "'");
    }
    r.forest.seed = seed;
    if (j.contains("params")) {
        if (r.type != RerankerType::forest) {
            throw ConfigError(where + ": params are only accepted for forest rerankers");
        }
        try {
            r.forest = j.at("params").get<rerank::ForestParams>();
        } catch (const json::exception& e) {
            throw ConfigError(where + ".params: " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError(where + ".params: " + e.what());
        }
        if (!j.at("params").contains("seed")) {
            r.forest.seed = seed;
        }
    }
    read(j, "message_budget", r.message_budget, where);
    r.remote = parse_remote(j, where);
    if ((r.type == RerankerType::llm || r.type == RerankerType::pairwise) && r.remote.url.empty()) {
        throw ConfigError(where + ": remote reranker needs a url");
    }
    if (r.name.empty() || r.message_budget == 0) {
        throw ConfigError(where + ": name must be non-empty and message_budget positive");
    }
    return r;
}

EvaluationConfig parse_evaluation(const json& j) {
    const std::string where = "evaluation";
    check_keys(j, {"ks", "test_ratio", "sample_size", "repeats"}, where);
    EvaluationConfig e;
    read(j, "ks", e.ks, where);
    read(j, "test_ratio", e.test_ratio, where);
    read(j, "sample_size", e.sample_size, where);
    read(j, "repeats", e.repeats, where);
    if (e.ks.empty() || std::find(e.ks.begin(), e.ks.end(), 0) != e.ks.end()) {
        throw ConfigError("evaluation.ks must be a non-empty list of positive cutoffs");
    }
    std::sort(e.ks.begin(), e.ks.end());
    e.ks.erase(std::unique(e.ks.begin(), e.ks.end()), e.ks.end());
    if (!(e.test_ratio > 0.0 && e.test_ratio < 1.0) || e.sample_size == 0 || e.repeats == 0) {
        throw ConfigError("evaluation: test_ratio must lie in (0, 1); sample_size and repeats must be positive");
    }
    return e;
}

std::vector<retrieval::RetrieverConfig> default_retrievers(std::uint64_t seed) {
    std::vector<retrieval::RetrieverConfig> out(3);
    out[0].name = "bm25";
    out[0].kind = retrieval::RetrieverKind::bm25;
    out[1].name = "flat";
    out[1].kind = retrieval::RetrieverKind::flat;
    out[2].name = "rrf";
    out[2].kind = retrieval::RetrieverKind::rrf;
    for (auto& r : out) {
        r.vector.hnsw.seed = r.vector.lsh.seed = r.vector.rp_forest.seed = seed;
    }
    return out;
}

std::vector<RerankerConfig> default_rerankers(std::uint64_t seed) {
    std::vector<RerankerConfig> out(3);
    out[0].name = "retrieval_order";
    out[0].type = RerankerType::identity;
    out[1].name = "forest";
    out[1].type = RerankerType::forest;
    out[2].name = "frlink";
    out[2].type = RerankerType::frlink;
    for (auto& r : out) {
        r.forest.seed = seed;
    }
    return out;
}

} // namespace

std::string_view to_string(RerankerType type) {
    switch (type) {
    case RerankerType::identity:
        return "identity";
    case RerankerType::forest:
        return "forest";
    case RerankerType::frlink:
        return "frlink";
    case RerankerType::llm:
        return "llm";
    case RerankerType::pairwise:
        return "pairwise";
    }
    return "identity";
}

EndpointConfig RemoteConfig::endpoint() const {
    EndpointConfig e;
    e.url = url;
    e.auth_token = token_env.empty() ? std::string() : env_or_empty(token_env);
    e.timeout_ms = timeout_ms;
    e.max_retries = max_retries;
    e.backoff_ms = backoff_ms;
    e.min_interval_ms = min_interval_ms;
    e.max_concurrency = max_concurrency;
    return e;
}

const retrieval::RetrieverConfig& RunConfig::retriever(const std::string& name) const {
    for (const auto& r : retrievers) {
        if (r.name == name) {
            return r;
        }
    }
    throw ConfigError("no retriever named '" + name + "'");
}

bool RunConfig::needs_embeddings() const {
    for (const auto& r : retrievers) {
        if (retrieval::is_dense(r.kind) || r.kind == retrieval::RetrieverKind::rrf) {
            return true;
        }
    }
    return false;
}

bool RunConfig::has_reranker(RerankerType type) const {
    for (const auto& r : rerankers) {
        if (r.type == type) {
            return true;
        }
    }
    return false;
}

json RunConfig::canonical() const {
    json projects_json = json::array();
    for (const auto& p : projects) {
        projects_json.push_back({{"id", p.id},
                                 {"issues", p.issues.filename().string()},
                                 {"commits", p.commits.filename().string()},
                                 {"key_style", corpus::to_string(p.key_style)},
                                 {"keys", p.keys}});
    }
    json embedding_json{{"provider", embedding.provider == EmbeddingProviderKind::hashing ? "hashing" : "http"},
                        {"dim", embedding.dim},
                        {"seed", embedding.hashing_seed}};
    if (embedding.provider == EmbeddingProviderKind::http) {
        embedding_json["remote"] = remote_json(embedding.remote);
    }
    json rerankers_json = json::array();
    for (const auto& r : rerankers) {
        json item{{"name", r.name}, {"type", to_string(r.type)}};
        if (r.type == RerankerType::forest) {
            item["params"] = r.forest;
        }
        if (r.type == RerankerType::llm || r.type == RerankerType::pairwise) {
            item["remote"] = remote_json(r.remote);
        }
        if (r.type == RerankerType::llm) {
            item["message_budget"] = r.message_budget;
        }
        rerankers_json.push_back(std::move(item));
    }
    return {{"projects", projects_json},
            {"window", window},
            {"coverage_policies", coverage_policies},
            {"embedding", embedding_json},
            {"retrievers", retrievers},
            {"candidate_retriever", candidate_retriever},
            {"rerankers", rerankers_json},
            {"rerank_k", rerank_k},
            {"negatives_per_issue", negatives_per_issue},
            {"evaluation",
             {{"ks", evaluation.ks},
              {"test_ratio", evaluation.test_ratio},
              {"sample_size", evaluation.sample_size},
              {"repeats", evaluation.repeats}}},
            {"seed", seed}};
}

std::string RunConfig::fingerprint() const { return sha256_hex(canonical().dump()); }

RunConfig parse_config(const json& j, const fs::path& base_dir) {
    check_keys(j,
               {"projects", "window", "coverage_policies", "embedding", "retrievers", "candidate_retriever",
                "rerankers", "rerank_k", "negatives_per_issue", "evaluation", "seed", "output_dir", "workers"},
               "config");
    RunConfig c;
    c.config_dir = base_dir;
    c.seed = get<std::uint64_t>(j, "seed", "config");

    const auto& projects = j.contains("projects") ? j.at("projects") : throw ConfigError("config: missing required key 'projects'");
    if (!projects.is_array() || projects.empty()) {
        throw ConfigError("config: projects must be a non-empty list");
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < projects.size(); ++i) {
        c.projects.push_back(parse_project(projects[i], base_dir, i));
        if (!ids.insert(c.projects.back().id).second) {
            throw ConfigError("config: duplicate project id '" + c.projects.back().id + "'");
        }
    }
    if (j.contains("window")) {
        c.window = parse_window(j.at("window"), "window");
    }
    if (j.contains("coverage_policies")) {
        const auto& list = j.at("coverage_policies");
        if (!list.is_array() || list.empty()) {
            throw ConfigError("config: coverage_policies must be a non-empty list");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            c.coverage_policies.push_back(parse_window(list[i], "coverage_policies[" + std::to_string(i) + "]"));
        }
    } else {
        c.coverage_policies = {temporal::WindowPolicy::creation_only(365), temporal::WindowPolicy::hybrid(365, 7),
                               temporal::WindowPolicy::hybrid(365, 30)};
    }
    if (j.contains("embedding")) {
        c.embedding = parse_embedding(j.at("embedding"));
    }
    if (j.contains("retrievers")) {
        const auto& list = j.at("retrievers");
        if (!list.is_array() || list.empty()) {
            throw ConfigError("config: retrievers must be a non-empty list");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            c.retrievers.push_back(parse_retriever(list[i], c.seed, i));
        }
    } else {
        c.retrievers = default_retrievers(c.seed);
    }
    std::set<std::string> names;
    for (const auto& r : c.retrievers) {
        check_name(r.name, "retriever name");
        if (!names.insert(r.name).second) {
            throw ConfigError("config: duplicate retriever name '" + r.name + "'");
        }
    }
    read(j, "candidate_retriever", c.candidate_retriever, "config");
    c.retriever(c.candidate_retriever);
    if (j.contains("rerankers")) {
        const auto& list = j.at("rerankers");
        if (!list.is_array()) {
            throw ConfigError("config: rerankers must be a list");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            c.rerankers.push_back(parse_reranker(list[i], c.seed, i));
        }
    } else {
        c.rerankers = default_rerankers(c.seed);
    }
    names.clear();
    for (const auto& r : c.rerankers) {
        check_name(r.name, "reranker name");
        if (!names.insert(r.name).second) {
            throw ConfigError("config: duplicate reranker name '" + r.name + "'");
        }
    }
    read(j, "rerank_k", c.rerank_k, "config");
    read(j, "negatives_per_issue", c.negatives_per_issue, "config");
    if (c.rerank_k == 0) {
        throw ConfigError("config: rerank_k must be positive");
    }
    if (j.contains("evaluation")) {
        c.evaluation = parse_evaluation(j.at("evaluation"));
    }
    c.output_dir = resolve(base_dir, j.value("output_dir", std::string("commitlink-out")));
    read(j, "workers", c.workers, "config");
    return c;
}

RunConfig load_config(const fs::path& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    if (overrides.seed) {
        if (!j.is_object()) {
            throw ConfigError("config file " + path.string() + " must hold an object");
        }
        j["seed"] = *overrides.seed;
    }
    auto config = parse_config(j, fs::absolute(path).parent_path());
    if (overrides.output_dir) {
        config.output_dir = fs::absolute(*overrides.output_dir);
    }
    if (overrides.workers) {
        config.workers = *overrides.workers;
    }
    for (const auto& p : config.projects) {
        for (const auto& f : {p.issues, p.commits}) {
            if (!fs::is_regular_file(f)) {
                throw ConfigError("project " + p.id + ": input file " + f.string() + " does not exist");
            }
        }
    }
    return config;
}

} // namespace commitlink::pipeline
