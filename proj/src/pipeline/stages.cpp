#include "commitlink/pipeline/stages.hpp"

#include "commitlink/common/binary_io.hpp"
#include "commitlink/common/errors.hpp"
#include "commitlink/common/hash.hpp"
#include "commitlink/common/parallel.hpp"
#include "commitlink/corpus/documents.hpp"
#include "commitlink/corpus/ingest.hpp"
#include "commitlink/corpus/issue_keys.hpp"
#include "commitlink/eval/report.hpp"
#include "commitlink/eval/split.hpp"
#include "commitlink/pipeline/manifest.hpp"
#include "commitlink/rerank/features.hpp"
#include "commitlink/rerank/forest.hpp"
#include "commitlink/rerank/frlink.hpp"
#include "commitlink/rerank/llm.hpp"
#include "commitlink/rerank/pairwise.hpp"
#include "commitlink/rerank/reranker.hpp"
#include "commitlink/rerank/training_set.hpp"
#include "commitlink/retrieval/retriever.hpp"
#include "commitlink/temporal/coverage.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <optional>
#include <set>
#include <unordered_map>

namespace commitlink::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using retrieval::RankedList;

namespace {

constexpr const char* kMarker = "stage.json";
constexpr std::size_t kMaxListedWarnings = 50;

using Clock = std::chrono::steady_clock;
using ListMap = std::map<std::string, RankedList>;

// ---------------------------------------------------------------- artifacts

std::string keyed(const std::string& parent, const json& settings) {
    return sha256_hex(parent + "\n" + settings.dump());
}

void require_stage(const fs::path& dir, std::string_view stage) {
    if (!fs::exists(dir / kMarker)) {
        throw PrerequisiteError(std::string(stage) + " artifacts for this config are missing (" +
                                (dir / kMarker).string() + "); run `commitlink " + std::string(stage) +
                                "` with the same config first");
    }
}

fs::path fresh_dir(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json finish_stage(const RunConfig& config, std::string_view stage, const std::string& key, const fs::path& dir,
                  Clock::time_point start, json counts) {
    write_json_file(dir / kMarker, {{"stage", stage}, {"key", key}, {"counts", counts}});
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    record_stage(config, {std::string(stage), key, dir, seconds, counts});
    spdlog::info("{} finished in {:.2f}s -> {}", stage, seconds, dir.string());
    return counts;
}

void write_lines(const fs::path& path, const std::vector<json>& rows) {
    fs::create_directories(path.parent_path());
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        for (const auto& row : rows) {
            out << dump_line(row) << '\n';
        }
        if (!out) {
            throw IoError("failed writing " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

template <class Fn>
void read_lines(const fs::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PrerequisiteError("missing artifact " + path.string());
    }
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) {
            continue;
        }
        try {
            fn(json::parse(line));
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
}

void write_lists(const fs::path& path, const ListMap& lists) {
    std::vector<json> rows;
    rows.reserve(lists.size());
    for (const auto& [qid, list] : lists) {
        rows.emplace_back(list);
    }
    write_lines(path, rows);
}

ListMap read_lists(const fs::path& path) {
    ListMap lists;
    read_lines(path, [&](const json& j) {
        auto list = j.get<RankedList>();
        auto qid = list.query_id;
        lists.emplace(std::move(qid), std::move(list));
    });
    return lists;
}

// ------------------------------------------------------------------ corpus

struct ProjectData {
    const ProjectConfig* config = nullptr;
    std::optional<corpus::IssueKeyPattern> pattern;
    std::vector<corpus::IssueRecord> issues;
    std::vector<corpus::CommitRecord> commits;  // after filtering
    std::vector<corpus::Document> documents;    // parallel to commits
    std::vector<corpus::TrueLink> links;
    eval::Judgments judgments;
    std::vector<std::size_t> linked;  // issues with >= 1 link, by query_id
    std::unordered_map<std::string, std::size_t> issue_by_qid;
    std::unordered_map<std::string, std::size_t> commit_by_hash;

    void index() {
        issue_by_qid.clear();
        commit_by_hash.clear();
        judgments.clear();
        linked.clear();
        for (std::size_t i = 0; i < issues.size(); ++i) {
            issue_by_qid.emplace(corpus::query_id(issues[i]), i);
        }
        for (std::size_t i = 0; i < commits.size(); ++i) {
            commit_by_hash.emplace(commits[i].hash, i);
        }
        for (const auto& l : links) {
            judgments[corpus::query_id(l.project_id, l.issue_key)].insert(l.commit_hash);
        }
        for (const auto& [qid, _] : judgments) {
            linked.push_back(issue_by_qid.at(qid));
        }
    }
};

fs::path project_dir(const fs::path& ingest_dir, const std::string& id) { return ingest_dir / "projects" / id; }

std::vector<ProjectData> load_projects(const RunConfig& config, const fs::path& ingest_dir) {
    require_stage(ingest_dir, "ingest");
    std::vector<ProjectData> out(config.projects.size());
    for (std::size_t p = 0; p < config.projects.size(); ++p) {
        auto& data = out[p];
        data.config = &config.projects[p];
        data.pattern.emplace(data.config->key_style, data.config->keys);
        const auto dir = project_dir(ingest_dir, data.config->id);
        data.issues = corpus::ingest_issues(dir / "issues.jsonl").records;
        data.commits = corpus::ingest_commits(dir / "commits.jsonl").records;
        read_lines(dir / "documents.jsonl", [&](const json& j) { data.documents.push_back(j.get<corpus::Document>()); });
        read_lines(dir / "links.jsonl", [&](const json& j) { data.links.push_back(j.get<corpus::TrueLink>()); });
        if (data.documents.size() != data.commits.size()) {
            throw DataError("ingest artifacts of project " + data.config->id + " are inconsistent");
        }
        data.index();
    }
    return out;
}

std::size_t project_of(const std::vector<ProjectData>& projects, const std::string& qid) {
    const auto slash = qid.find('/');
    const auto id = qid.substr(0, slash);
    for (std::size_t i = 0; i < projects.size(); ++i) {
        if (projects[i].config->id == id) {
            return i;
        }
    }
    throw DataError("query " + qid + " belongs to no configured project");
}

eval::Judgments all_judgments(const std::vector<ProjectData>& projects) {
    eval::Judgments out;
    for (const auto& p : projects) {
        out.insert(p.judgments.begin(), p.judgments.end());
    }
    return out;
}

std::string normalized_key(std::string key, corpus::KeyStyle style) {
    if (style == corpus::KeyStyle::github) {
        key.erase(0, key.find_first_not_of('#'));
        return key;
    }
    for (auto& c : key) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return key;
}

// Pool document ids of one issue, in timeline order.
std::vector<std::string> pool_ids(const ProjectData& project, const temporal::CommitTimeline& timeline,
                                  const corpus::IssueRecord& issue, const temporal::WindowPolicy& window) {
    std::vector<std::string> ids;
    for (const auto i : timeline.pool(issue, window)) {
        ids.push_back(project.commits[i].hash);
    }
    return ids;
}

// ------------------------------------------------------------------ features

struct FeatureInputs {
    std::vector<rerank::CandidateInfo> infos;  // parallel to commits
    std::optional<temporal::CommitTimeline> timeline;
};

FeatureInputs feature_inputs(const ProjectData& project, std::size_t workers) {
    FeatureInputs in;
    in.infos.resize(project.commits.size());
    parallel_for(project.commits.size(), workers, [&](std::size_t i) {
        in.infos[i] = rerank::make_candidate_info(project.commits[i], *project.pattern);
    });
    in.timeline.emplace(project.commits);
    return in;
}

rerank::FeatureOptions feature_options(const RunConfig& config) {
    rerank::FeatureOptions o;
    o.closure_before_days = config.window.closure_before_days.value_or(30);
    o.closure_after_days = config.window.closure_after_days.value_or(30);
    o.bm25 = config.retriever(config.candidate_retriever).bm25;
    return o;
}

rerank::FeatureContext feature_context(const RunConfig& config, const ProjectData& project, const FeatureInputs& in,
                                       const corpus::IssueRecord& issue, const RankedList& candidates) {
    std::vector<const rerank::CandidateInfo*> pool;
    for (const auto i : in.timeline->pool(issue, config.window)) {
        pool.push_back(&in.infos[i]);
    }
    auto tokens = retrieval::tokenize(corpus::issue_query(issue, *project.pattern));
    return rerank::FeatureContext(issue, std::move(tokens), pool, candidates, feature_options(config));
}

const rerank::CandidateInfo& info_of(const ProjectData& project, const FeatureInputs& in, const std::string& hash) {
    const auto it = project.commit_by_hash.find(hash);
    if (it == project.commit_by_hash.end()) {
        throw DataError("unknown commit " + hash + " in project " + project.config->id);
    }
    return in.infos[it->second];
}

// ------------------------------------------------------------------ embedding

std::unique_ptr<retrieval::EmbeddingProvider> make_provider(const EmbeddingConfig& e) {
    if (e.provider == EmbeddingProviderKind::hashing) {
        return std::make_unique<retrieval::HashingEmbedder>(e.dim, e.hashing_seed);
    }
    return std::make_unique<retrieval::HttpEmbedder>(e.remote.endpoint(), e.dim, e.batch_size, e.remote.model);
}

json embedding_settings(const EmbeddingConfig& e) {
    json j{{"provider", e.provider == EmbeddingProviderKind::hashing ? "hashing" : "http"}, {"dim", e.dim}};
    if (e.provider == EmbeddingProviderKind::hashing) {
        j["seed"] = e.hashing_seed;
        j["stopwords"] = retrieval::kStopwordListVersion;
    } else {
        j["url"] = e.remote.url;
        j["model"] = e.remote.model;
    }
    return j;
}

void save_store(const fs::path& path, const retrieval::VectorStore& store) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    binio::write_header(out, "CLEMBEDS", 1);
    store.save(out);
}

} // namespace

// ------------------------------------------------------------------ keys

StageKeys stage_keys(const RunConfig& config) {
    const auto canonical = config.canonical();
    json inputs = json::array();
    for (const auto& p : config.projects) {
        inputs.push_back({{"id", p.id},
                          {"key_style", corpus::to_string(p.key_style)},
                          {"keys", p.keys},
                          {"issues_sha256", sha256_file(p.issues)},
                          {"commits_sha256", sha256_file(p.commits)}});
    }
    StageKeys k;
    k.ingest = keyed(COMMITLINK_VERSION, {{"projects", inputs}, {"stopwords", retrieval::kStopwordListVersion}});
    k.coverage = keyed(k.ingest, canonical.at("coverage_policies"));
    k.retrieve = keyed(k.ingest, {{"window", canonical.at("window")},
                                  {"embedding", embedding_settings(config.embedding)},
                                  {"retrievers", canonical.at("retrievers")}});
    json forests = json::array();
    for (const auto& r : config.rerankers) {
        if (r.type == RerankerType::forest) {
            forests.push_back({{"name", r.name}, {"params", r.forest}});
        }
    }
    k.train = keyed(k.retrieve, {{"candidate_retriever", config.candidate_retriever},
                                 {"negatives_per_issue", config.negatives_per_issue},
                                 {"forests", forests},
                                 {"frlink", config.has_reranker(RerankerType::frlink)},
                                 {"feature_schema", rerank::kFeatureSchemaVersion},
                                 {"test_ratio", config.evaluation.test_ratio},
                                 {"sample_size", config.evaluation.sample_size},
                                 {"repeats", config.evaluation.repeats},
                                 {"seed", config.seed}});
    k.rerank = keyed(k.train, {{"rerankers", canonical.at("rerankers")},
                               {"rerank_k", config.rerank_k},
                               {"prompt_template", rerank::kPromptTemplateVersion}});
    k.evaluate = keyed(k.rerank, {{"ks", config.evaluation.ks}});
    return k;
}

fs::path stage_dir(const RunConfig& config, std::string_view stage, const StageKeys& keys) {
    std::string key;
    if (stage == "ingest") {
        key = keys.ingest;
    } else if (stage == "coverage") {
        key = keys.coverage;
    } else if (stage == "retrieve") {
        key = keys.retrieve;
    } else if (stage == "train") {
        key = keys.train;
    } else if (stage == "rerank") {
        key = keys.rerank;
    } else if (stage == "evaluate") {
        key = keys.evaluate;
    } else {
        throw std::invalid_argument("unknown stage " + std::string(stage));
    }
    return config.output_dir / std::string(stage) / key.substr(0, 16);
}

// ------------------------------------------------------------------ ingest

json cmd_ingest(const RunConfig& config) {
    const auto start = Clock::now();
    const auto keys = stage_keys(config);
    const auto dir = fresh_dir(stage_dir(config, "ingest", keys));
    json quality = json::object();
    json counts = json::object();
    for (const auto& project : config.projects) {
        spdlog::info("ingesting project {}", project.id);
        auto issues = corpus::ingest_issues(project.issues);
        auto commits = corpus::ingest_commits(project.commits);
        if (issues.records.empty()) {
            throw DataError("project " + project.id + ": no usable issues in " + project.issues.string());
        }
        if (commits.records.empty()) {
            throw DataError("project " + project.id + ": no usable commits in " + project.commits.string());
        }
        for (auto& i : issues.records) {
            i.project_id = project.id;
        }
        for (auto& c : commits.records) {
            c.project_id = project.id;
        }
        const corpus::IssueKeyPattern pattern(project.key_style, project.keys);

        std::size_t merges = 0;
        std::size_t without_files = 0;
        for (const auto& c : commits.records) {
            if (c.parents.size() > 1) {
                ++merges;
            } else if (c.file_changes.empty()) {
                ++without_files;
            }
        }
        const auto kept = corpus::filter_commits(commits.records);
        std::set<std::string> kept_hashes;
        for (const auto& c : kept) {
            kept_hashes.insert(c.hash);
        }

        std::map<std::string, std::string> issue_keys;
        for (const auto& i : issues.records) {
            issue_keys.emplace(normalized_key(i.issue_key, project.key_style), i.issue_key);
        }
        const auto mined = corpus::extract_true_links(commits.records, pattern);
        std::set<corpus::TrueLink> links;
        std::size_t unresolved = 0;
        std::size_t excluded_commit = 0;
        for (auto link : mined) {
            const auto it = issue_keys.find(normalized_key(link.issue_key, project.key_style));
            if (it == issue_keys.end()) {
                ++unresolved;
                continue;
            }
            if (!kept_hashes.contains(link.commit_hash)) {
                ++excluded_commit;
                continue;
            }
            link.issue_key = it->second;
            links.insert(std::move(link));
        }
        std::set<std::string> linked_issues;
        for (const auto& l : links) {
            linked_issues.insert(l.issue_key);
        }

        const auto pdir = project_dir(dir, project.id);
        fs::create_directories(pdir);
        {
            std::ofstream out(pdir / "issues.jsonl", std::ios::binary);
            corpus::write_issues(out, issues.records);
        }
        {
            std::ofstream out(pdir / "commits.jsonl", std::ios::binary);
            corpus::write_commits(out, kept);
        }
        std::vector<json> doc_rows;
        for (const auto& c : kept) {
            doc_rows.emplace_back(corpus::commit_document(c, pattern));
        }
        write_lines(pdir / "documents.jsonl", doc_rows);
        std::vector<json> link_rows(links.begin(), links.end());
        write_lines(pdir / "links.jsonl", link_rows);

        auto warnings = [](const auto& result) {
            json list = json::array();
            for (std::size_t i = 0; i < std::min(result.warnings.size(), kMaxListedWarnings); ++i) {
                list.push_back({{"line", result.warnings[i].line}, {"message", result.warnings[i].message}});
            }
            return list;
        };
        quality[project.id] = {{"issues_kept", issues.records.size()},
                               {"issues_skipped", issues.skipped},
                               {"issues_with_inverted_closure", issues.inverted_closure},
                               {"issue_warnings", warnings(issues)},
                               {"commits_read", commits.records.size()},
                               {"commits_skipped", commits.skipped},
                               {"commit_warnings", warnings(commits)},
                               {"merge_commits_excluded", merges},
                               {"commits_without_file_changes_excluded", without_files},
                               {"commits_kept", kept.size()},
                               {"links_mined", mined.size()},
                               {"links_to_unknown_issues", unresolved},
                               {"links_to_excluded_commits", excluded_commit},
                               {"links_kept", links.size()},
                               {"linked_issues", linked_issues.size()}};
        counts[project.id] = {{"issues", issues.records.size()},
                              {"commits_kept", kept.size()},
                              {"merge_commits_excluded", merges},
                              {"commits_without_file_changes_excluded", without_files},
                              {"links", links.size()},
                              {"linked_issues", linked_issues.size()}};
        if (!issues.warnings.empty() || !commits.warnings.empty()) {
            spdlog::warn("project {}: skipped {} issue line(s) and {} commit line(s); see quality.json", project.id,
                         issues.skipped, commits.skipped);
        }
    }
    write_json_file(dir / "quality.json", quality);
    return finish_stage(config, "ingest", keys.ingest, dir, start, counts);
}

// ------------------------------------------------------------------ coverage

json cmd_coverage(const RunConfig& config) {
    const auto start = Clock::now();
    const auto keys = stage_keys(config);
    const auto projects = load_projects(config, stage_dir(config, "ingest", keys));
    const auto dir = fresh_dir(stage_dir(config, "coverage", keys));
    std::vector<corpus::IssueRecord> issues;
    std::vector<corpus::CommitRecord> commits;
    std::vector<corpus::TrueLink> links;
    for (const auto& p : projects) {
        issues.insert(issues.end(), p.issues.begin(), p.issues.end());
        commits.insert(commits.end(), p.commits.begin(), p.commits.end());
        links.insert(links.end(), p.links.begin(), p.links.end());
    }
    const auto reports = temporal::coverage_sweep(links, issues, commits, config.coverage_policies);
    json rows = json::array();
    json counts = json::array();
    for (const auto& r : reports) {
        rows.push_back(temporal::to_json(r));
        counts.push_back({{"policy", r.policy.label()}, {"coverage", r.coverage}, {"links", r.total_links}});
    }
    write_json_file(dir / "coverage.json", rows);
    const auto table = temporal::format_coverage_table(reports);
    std::ofstream(dir / "coverage.txt", std::ios::binary) << table;
    spdlog::info("coverage:\n{}", table);
    return finish_stage(config, "coverage", keys.coverage, dir, start, {{"policies", counts}});
}

// ------------------------------------------------------------------ retrieve

json cmd_retrieve(const RunConfig& config) {
    const auto start = Clock::now();
    const auto keys = stage_keys(config);
    const auto projects = load_projects(config, stage_dir(config, "ingest", keys));
    const auto dir = fresh_dir(stage_dir(config, "retrieve", keys));
    const auto workers = config.workers;

    std::unique_ptr<retrieval::EmbeddingProvider> provider;
    if (config.needs_embeddings()) {
        provider = make_provider(config.embedding);
    }
    std::map<std::string, ListMap> lists;
    json pool_stats = json::object();
    for (const auto& project : projects) {
        const retrieval::DocumentStore store(project.documents);
        const temporal::CommitTimeline timeline(project.commits);
        const auto n = project.linked.size();
        std::vector<retrieval::IssueQuery> queries(n);
        std::vector<std::vector<std::string>> pools(n);
        std::vector<std::string> texts(n);
        std::size_t captured = 0;
        std::size_t total_links = 0;
        std::size_t empty_pools = 0;
        double pool_sum = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            const auto& issue = project.issues[project.linked[q]];
            queries[q].query_id = corpus::query_id(issue);
            texts[q] = corpus::issue_query(issue, *project.pattern);
            queries[q].tokens = retrieval::tokenize(texts[q]);
            pools[q] = pool_ids(project, timeline, issue, config.window);
            pool_sum += static_cast<double>(pools[q].size());
            empty_pools += pools[q].empty() ? 1 : 0;
            const auto& relevant = project.judgments.at(queries[q].query_id);
            total_links += relevant.size();
            for (const auto& id : pools[q]) {
                captured += relevant.contains(id) ? 1 : 0;
            }
        }
        pool_stats[project.config->id] = {{"queries", n},
                                          {"empty_pools", empty_pools},
                                          {"mean_pool_size", n == 0 ? 0.0 : pool_sum / static_cast<double>(n)},
                                          {"links_in_pool", captured},
                                          {"links", total_links}};

        std::map<std::string, retrieval::Vector> doc_vectors;
        if (provider) {
            spdlog::info("embedding {} documents and {} queries for {}", project.documents.size(), n,
                         project.config->id);
            doc_vectors = retrieval::embed_documents(*provider, project.documents, config.embedding.batch_size);
            for (std::size_t b = 0; b < n; b += config.embedding.batch_size) {
                const auto e = std::min(n, b + config.embedding.batch_size);
                auto vectors = provider->embed(std::span<const std::string>(texts.data() + b, e - b));
                for (std::size_t q = b; q < e; ++q) {
                    queries[q].vector = std::move(vectors[q - b]);
                }
            }
            std::vector<std::string> ids;
            std::vector<retrieval::Vector> vectors;
            for (const auto& [id, v] : doc_vectors) {
                ids.push_back(id);
                vectors.push_back(v);
            }
            save_store(dir / "embeddings" / (project.config->id + ".documents.bin"),
                       retrieval::VectorStore(ids, vectors));
            ids.clear();
            vectors.clear();
            for (const auto& q : queries) {
                ids.push_back(q.query_id);
                vectors.push_back(q.vector);
            }
            save_store(dir / "embeddings" / (project.config->id + ".queries.bin"),
                       retrieval::VectorStore(ids, vectors));
        }

        std::optional<retrieval::SparseIndex> global_bm25;
        std::optional<retrieval::SparseIndex> global_bm25l;
        for (const auto& r : config.retrievers) {
            if (r.scope != retrieval::SparseScope::global || store.size() == 0) {
                continue;
            }
            const auto kind = r.kind == retrieval::RetrieverKind::rrf ? r.sparse : r.kind;
            if (!retrieval::is_sparse(kind)) {
                continue;
            }
            auto& slot = kind == retrieval::RetrieverKind::bm25 ? global_bm25 : global_bm25l;
            if (!slot) {
                slot = retrieval::build_global_sparse_index(store, kind, r.bm25);
                const auto path = dir / "indexes" / (project.config->id + "." + std::string(to_string(kind)) + ".bin");
                fs::create_directories(path.parent_path());
                std::ofstream out(path, std::ios::binary);
                slot->save(out);
            }
        }
        retrieval::RetrievalContext context;
        context.docs = &store;
        context.embeddings = provider ? &doc_vectors : nullptr;
        context.global_bm25 = global_bm25 ? &*global_bm25 : nullptr;
        context.global_bm25l = global_bm25l ? &*global_bm25l : nullptr;

        for (const auto& r : config.retrievers) {
            spdlog::info("retrieving with {} for {} issues of {}", r.name, n, project.config->id);
            std::vector<RankedList> results(n);
            parallel_for(n, workers, [&](std::size_t q) {
                results[q] = retrieval::retrieve_for_issue(queries[q], pools[q], r, context);
            });
            auto& out = lists[r.name];
            for (auto& list : results) {
                auto qid = list.query_id;
                out.emplace(std::move(qid), std::move(list));
            }
        }
    }
    json counts = json::object();
    for (const auto& r : config.retrievers) {
        write_lists(dir / "lists" / (r.name + ".jsonl"), lists[r.name]);
        counts[r.name] = lists[r.name].size();
    }
    write_json_file(dir / "pools.json", pool_stats);
    return finish_stage(config, "retrieve", keys.retrieve, dir, start, {{"lists", counts}, {"pools", pool_stats}});
}

// ------------------------------------------------------------------ train

json cmd_train(const RunConfig& config) {
    const auto start = Clock::now();
    const auto keys = stage_keys(config);
    const auto projects = load_projects(config, stage_dir(config, "ingest", keys));
    const auto retrieve_dir = stage_dir(config, "retrieve", keys);
    require_stage(retrieve_dir, "retrieve");
    const auto candidates = read_lists(retrieve_dir / "lists" / (config.candidate_retriever + ".jsonl"));
    const auto dir = fresh_dir(stage_dir(config, "train", keys));

    json split_json{{"projects", json::object()}};
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    for (const auto& project : projects) {
        std::vector<corpus::IssueRecord> linked;
        for (const auto i : project.linked) {
            linked.push_back(project.issues[i]);
        }
        if (linked.size() < eval::kMinSplitIssues) {
            throw DataError("project " + project.config->id + " has " + std::to_string(linked.size()) +
                            " linked issues; the chronological split needs at least " +
                            std::to_string(eval::kMinSplitIssues));
        }
        const auto split = eval::chrono_split(linked, config.evaluation.test_ratio);
        split_json["projects"][project.config->id] = split;
        train_ids.insert(train_ids.end(), split.train.begin(), split.train.end());
        test_ids.insert(test_ids.end(), split.test.begin(), split.test.end());
    }
    std::sort(test_ids.begin(), test_ids.end());
    const auto samples =
        eval::sample_test(test_ids, config.evaluation.sample_size, config.evaluation.repeats, config.seed);
    split_json["samples"] = samples;
    split_json["seed"] = config.seed;
    write_json_file(dir / "split.json", split_json);

    json counts{{"train_issues", train_ids.size()}, {"test_issues", test_ids.size()}, {"samples", samples.size()}};
    const bool need_forest = config.has_reranker(RerankerType::forest);
    const bool need_frlink = config.has_reranker(RerankerType::frlink);
    if (!need_forest && !need_frlink) {
        return finish_stage(config, "train", keys.train, dir, start, counts);
    }

    const auto judgments = all_judgments(projects);
    const auto pairs = rerank::make_training_set(train_ids, judgments, candidates, config.negatives_per_issue);

    // Features, grouped by issue so each pool is fitted once.
    std::vector<FeatureInputs> inputs;
    for (const auto& p : projects) {
        inputs.push_back(feature_inputs(p, config.workers));
    }
    std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end) into pairs
    for (std::size_t i = 0; i < pairs.size();) {
        auto j = i;
        while (j < pairs.size() && pairs[j].query_id == pairs[i].query_id) {
            ++j;
        }
        groups.emplace_back(i, j);
        i = j;
    }
    std::vector<rerank::FeatureVector> features(pairs.size());
    std::vector<double> frlink_scores(pairs.size());
    parallel_for(groups.size(), config.workers, [&](std::size_t g) {
        const auto [begin, end] = groups[g];
        const auto& qid = pairs[begin].query_id;
        const auto pi = project_of(projects, qid);
        const auto& project = projects[pi];
        const auto& issue = project.issues[project.issue_by_qid.at(qid)];
        const auto it = candidates.find(qid);
        const RankedList empty{qid, {}, {}};
        const auto ctx = feature_context(config, project, inputs[pi], issue, it == candidates.end() ? empty : it->second);
        for (auto i = begin; i < end; ++i) {
            const auto& info = info_of(project, inputs[pi], pairs[i].doc_id);
            features[i] = ctx.extract(info);
            frlink_scores[i] = ctx.frlink_score(info);
        }
    });

    std::vector<json> rows;
    rerank::Dataset data;
    data.n_features = rerank::kFeatureCount;
    std::vector<double> positive_scores;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        json row = pairs[i];
        row["features"] = features[i];
        row["frlink_score"] = frlink_scores[i];
        rows.push_back(std::move(row));
        data.add(features[i], pairs[i].positive);
        if (pairs[i].positive) {
            positive_scores.push_back(frlink_scores[i]);
        }
    }
    write_lines(dir / "training_set.jsonl", rows);
    counts["pairs"] = pairs.size();
    counts["positives"] = positive_scores.size();
    counts["negatives"] = pairs.size() - positive_scores.size();

    json models = json::object();
    for (const auto& r : config.rerankers) {
        if (r.type == RerankerType::forest) {
            rerank::TrainReport report;
            const auto model = rerank::ForestModel::train(data, r.forest, rerank::kFeatureSchemaVersion, &report);
            write_json_file(dir / "models" / (r.name + ".json"), model.to_json());
            models[r.name] = {{"type", "forest"},
                              {"examples", report.examples},
                              {"positives", report.positives},
                              {"in_bag_accuracy", report.in_bag_accuracy}};
        } else if (r.type == RerankerType::frlink) {
            rerank::FrlinkModel model;
            model.positives = positive_scores.size();
            if (positive_scores.size() >= rerank::kFrlinkMinPositives) {
                model.threshold = rerank::frlink_threshold(positive_scores);
            } else {
                spdlog::warn("{}: only {} training positives; no classification threshold learned", r.name,
                             positive_scores.size());
            }
            write_json_file(dir / "models" / (r.name + ".json"), model);
            models[r.name] = {{"type", "frlink"}, {"positives", model.positives}};
            models[r.name]["threshold"] = model.threshold ? json(*model.threshold) : json(nullptr);
        }
    }
    counts["models"] = models;
    write_json_file(dir / "train_report.json", counts);
    return finish_stage(config, "train", keys.train, dir, start, counts);
}

// ------------------------------------------------------------------ rerank

json cmd_rerank(const RunConfig& config) {
    const auto start = Clock::now();
    const auto keys = stage_keys(config);
    const auto projects = load_projects(config, stage_dir(config, "ingest", keys));
    const auto retrieve_dir = stage_dir(config, "retrieve", keys);
    const auto train_dir = stage_dir(config, "train", keys);
    require_stage(retrieve_dir, "retrieve");
    require_stage(train_dir, "train");
    const auto candidates = read_lists(retrieve_dir / "lists" / (config.candidate_retriever + ".jsonl"));
    const auto split = read_json_file(train_dir / "split.json");
    std::set<std::string> test_set;
    for (const auto& sample : split.at("samples")) {
        for (const auto& qid : sample) {
            test_set.insert(qid.get<std::string>());
        }
    }
    const std::vector<std::string> test_ids(test_set.begin(), test_set.end());
    const auto dir = fresh_dir(stage_dir(config, "rerank", keys));

    std::vector<RankedList> inputs(test_ids.size());
    for (std::size_t q = 0; q < test_ids.size(); ++q) {
        const auto it = candidates.find(test_ids[q]);
        inputs[q] = it == candidates.end() ? RankedList{test_ids[q], {}, config.candidate_retriever}
                                           : it->second.top(config.rerank_k);
    }
    std::vector<FeatureInputs> features;
    if (config.has_reranker(RerankerType::forest) || config.has_reranker(RerankerType::frlink)) {
        for (const auto& p : projects) {
            features.push_back(feature_inputs(p, config.workers));
        }
    }
    auto issue_of = [&](const std::string& qid) -> std::pair<std::size_t, const corpus::IssueRecord*> {
        const auto pi = project_of(projects, qid);
        return {pi, &projects[pi].issues[projects[pi].issue_by_qid.at(qid)]};
    };

    json events = json::object();
    for (const auto& r : config.rerankers) {
        spdlog::info("reranking {} test issues with {}", test_ids.size(), r.name);
        std::vector<RankedList> outputs(test_ids.size());
        std::vector<char> fallback(test_ids.size(), 0);
        std::vector<std::size_t> failed(test_ids.size(), 0);
        std::vector<std::size_t> truncated(test_ids.size(), 0);

        std::optional<rerank::ForestModel> forest;
        if (r.type == RerankerType::forest) {
            const auto path = train_dir / "models" / (r.name + ".json");
            if (!fs::exists(path)) {
                throw PrerequisiteError("missing forest model " + path.string() + "; run `commitlink train` first");
            }
            forest = rerank::ForestModel::from_json(read_json_file(path), rerank::kFeatureSchemaVersion);
        }
        std::unique_ptr<rerank::ChatClient> chat;
        std::unique_ptr<rerank::PairwiseClient> pairwise;
        if (r.type == RerankerType::llm) {
            chat = std::make_unique<rerank::ChatClient>(r.remote.endpoint(), r.remote.model);
        } else if (r.type == RerankerType::pairwise) {
            pairwise = std::make_unique<rerank::PairwiseClient>(r.remote.endpoint());
        }

        parallel_for(test_ids.size(), config.workers, [&](std::size_t q) {
            const auto& input = inputs[q];
            const auto [pi, issue] = issue_of(test_ids[q]);
            const auto& project = projects[pi];
            if (r.type == RerankerType::llm) {
                rerank::RerankRequestBatch batch;
                batch.query_id = input.query_id;
                batch.issue_title = project.pattern->scrub(issue->title);
                batch.issue_description = project.pattern->scrub(issue->description);
                for (const auto& e : input.entries) {
                    const auto& commit = project.commits[project.commit_by_hash.at(e.doc_id)];
                    batch.candidates.push_back({e.doc_id, project.pattern->scrub(commit.message)});
                }
                auto result = rerank::llm_rerank(*chat, batch, r.name, r.message_budget);
                outputs[q] = std::move(result.list);
                fallback[q] = result.fallback;
                truncated[q] = result.truncated_messages;
                return;
            }
            rerank::BatchScorer scorer;
            std::optional<rerank::FeatureContext> ctx;
            if (r.type == RerankerType::forest || r.type == RerankerType::frlink) {
                const auto it = candidates.find(input.query_id);
                ctx.emplace(feature_context(config, project, features[pi], *issue,
                                            it == candidates.end() ? input : it->second));
            }
            switch (r.type) {
            case RerankerType::identity:
                scorer = rerank::identity_scorer();
                break;
            case RerankerType::forest:
                scorer = rerank::per_pair_scorer([&](const retrieval::ScoredDoc& d) {
                    const auto f = ctx->extract(info_of(project, features[pi], d.doc_id));
                    return forest->score(f);
                });
                break;
            case RerankerType::frlink:
                scorer = rerank::per_pair_scorer([&](const retrieval::ScoredDoc& d) {
                    return ctx->frlink_score(info_of(project, features[pi], d.doc_id));
                });
                break;
            case RerankerType::pairwise:
                scorer = [&](const RankedList& list) {
                    const auto query = corpus::issue_query(*issue, *project.pattern);
                    std::vector<rerank::TextPair> text_pairs;
                    for (const auto& e : list.entries) {
                        text_pairs.emplace_back(query, project.documents[project.commit_by_hash.at(e.doc_id)].text);
                    }
                    const auto scores = pairwise->score(text_pairs);
                    return std::vector<std::optional<double>>(scores.begin(), scores.end());
                };
                break;
            case RerankerType::llm:
                break;
            }
            auto outcome = rerank::rerank_with_model(scorer, input, config.rerank_k, r.name);
            outputs[q] = std::move(outcome.list);
            fallback[q] = outcome.fallback;
            failed[q] = outcome.failed_pairs;
        });

        ListMap out;
        json fallback_ids = json::array();
        std::size_t failed_total = 0;
        std::size_t truncated_total = 0;
        for (std::size_t q = 0; q < test_ids.size(); ++q) {
            if (fallback[q]) {
                fallback_ids.push_back(test_ids[q]);
            }
            failed_total += failed[q];
            truncated_total += truncated[q];
            out.emplace(test_ids[q], std::move(outputs[q]));
        }
        write_lists(dir / "lists" / (r.name + ".jsonl"), out);
        events[r.name] = {{"type", to_string(r.type)},
                          {"queries", test_ids.size()},
                          {"fallback_queries", fallback_ids},
                          {"failed_pairs", failed_total},
                          {"truncated_messages", truncated_total}};
        if (!fallback_ids.empty()) {
            spdlog::warn("{}: {} issue(s) fell back to retrieval order", r.name, fallback_ids.size());
        }
    }
    write_json_file(dir / "events.json", events);
    return finish_stage(config, "rerank", keys.rerank, dir, start, {{"test_issues", test_ids.size()}, {"events", events}});
}

// ------------------------------------------------------------------ evaluate

json cmd_evaluate(const RunConfig& config) {
    const auto start = Clock::now();
    const auto keys = stage_keys(config);
    const auto projects = load_projects(config, stage_dir(config, "ingest", keys));
    const auto retrieve_dir = stage_dir(config, "retrieve", keys);
    const auto train_dir = stage_dir(config, "train", keys);
    const auto rerank_dir = stage_dir(config, "rerank", keys);
    require_stage(retrieve_dir, "retrieve");
    require_stage(train_dir, "train");
    require_stage(rerank_dir, "rerank");
    const auto judgments = all_judgments(projects);
    const auto samples =
        read_json_file(train_dir / "split.json").at("samples").get<std::vector<std::vector<std::string>>>();
    const auto fingerprint = config.fingerprint();
    const auto dir = fresh_dir(stage_dir(config, "evaluate", keys));

    std::vector<eval::EvaluationReport> retrieval_reports;
    for (const auto& r : config.retrievers) {
        const auto lists = read_lists(retrieve_dir / "lists" / (r.name + ".jsonl"));
        retrieval_reports.push_back(eval::evaluate_run(lists, judgments, config.evaluation.ks, r.name, fingerprint));
        write_json_file(dir / "retrieval" / (r.name + ".json"), eval::to_json(retrieval_reports.back()));
    }
    std::vector<eval::EvaluationReport> rerank_reports;
    for (const auto& r : config.rerankers) {
        const auto lists = read_lists(rerank_dir / "lists" / (r.name + ".jsonl"));
        rerank_reports.push_back(
            eval::evaluate_run(lists, judgments, config.evaluation.ks, samples, r.name, fingerprint));
        write_json_file(dir / "rerank" / (r.name + ".json"), eval::to_json(rerank_reports.back()));
    }
    std::string tables = "Retrieval (all linked issues)\n";
    tables += eval::format_table(retrieval_reports, eval::columns_for(config.evaluation.ks));
    if (!rerank_reports.empty()) {
        tables += "\nReranking (" + std::to_string(config.rerank_k) + " candidates from " +
                  config.candidate_retriever + ", test samples)\n";
        tables += eval::format_table(rerank_reports, eval::summary_columns());
    }
    std::ofstream(dir / "tables.txt", std::ios::binary) << tables;
    spdlog::info("\n{}", tables);

    json summary = json::object();
    auto add = [&](const eval::EvaluationReport& report, const std::string& group) {
        json means = json::object();
        for (const auto& [k, m] : report.means) {
            means[std::to_string(k)] = {{"precision", m.precision}, {"hit", m.hit}, {"recall", m.recall},
                                        {"mrr", m.mrr}, {"ndcg", m.ndcg}};
        }
        summary[group][report.name] = {{"queries", report.query_count}, {"means", means}};
    };
    for (const auto& r : retrieval_reports) {
        add(r, "retrieval");
    }
    for (const auto& r : rerank_reports) {
        add(r, "rerank");
    }
    write_json_file(dir / "summary.json", summary);
    return finish_stage(config, "evaluate", keys.evaluate, dir, start, summary);
}

json cmd_all(const RunConfig& config) {
    json out;
    out["ingest"] = cmd_ingest(config);
    out["coverage"] = cmd_coverage(config);
    out["retrieve"] = cmd_retrieve(config);
    out["train"] = cmd_train(config);
    out["rerank"] = cmd_rerank(config);
    out["evaluate"] = cmd_evaluate(config);
    return out;
}

} // namespace commitlink::pipeline
