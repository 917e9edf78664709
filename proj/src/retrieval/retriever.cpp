#include "commitlink/retrieval/retriever.hpp"

#include "commitlink/common/errors.hpp"

#include <spdlog/spdlog.h>

#include <array>

namespace commitlink::retrieval {

namespace {

constexpr std::array kKinds{RetrieverKind::bm25, RetrieverKind::bm25l, RetrieverKind::flat, RetrieverKind::hnsw,
                            RetrieverKind::lsh,  RetrieverKind::rp_forest, RetrieverKind::rrf};

SparseVariant sparse_variant(RetrieverKind kind) {
    return kind == RetrieverKind::bm25l ? SparseVariant::bm25l : SparseVariant::bm25;
}

VectorIndexKind vector_kind(RetrieverKind kind) {
    switch (kind) {
    case RetrieverKind::hnsw:
        return VectorIndexKind::hnsw;
    case RetrieverKind::lsh:
        return VectorIndexKind::lsh;
    case RetrieverKind::rp_forest:
        return VectorIndexKind::rp_forest;
    default:
        return VectorIndexKind::flat;
    }
}

RankedList sparse_list(const IssueQuery& query, std::span<const std::string> pool, RetrieverKind kind,
                       const RetrieverConfig& config, const RetrievalContext& context) {
    const auto& docs = *context.docs;
    if (config.scope == SparseScope::global) {
        const auto* global = kind == RetrieverKind::bm25l ? context.global_bm25l : context.global_bm25;
        if (global == nullptr) {
            throw PrerequisiteError("global sparse index for " + std::string(to_string(kind)) + " is not built");
        }
        std::vector<std::size_t> ordinals;
        ordinals.reserve(pool.size());
        for (const auto& id : pool) {
            ordinals.push_back(docs.ordinal(id));
        }
        return global->search_subset(query.tokens, config.k, ordinals, query.query_id);
    }
    std::vector<std::string> ids(pool.begin(), pool.end());
    std::vector<TokenStream> tokens;
    tokens.reserve(pool.size());
    for (const auto& id : pool) {
        tokens.push_back(docs.tokens(id));
    }
    const auto index = SparseIndex::build(std::move(ids), tokens, sparse_variant(kind), config.bm25);
    return index.search(query.tokens, config.k, query.query_id);
}

RankedList dense_list(const IssueQuery& query, std::span<const std::string> pool, RetrieverKind kind,
                      const RetrieverConfig& config, const RetrievalContext& context) {
    if (context.embeddings == nullptr) {
        throw PrerequisiteError("dense retriever " + config.name + " needs document embeddings");
    }
    std::vector<std::string> ids(pool.begin(), pool.end());
    std::vector<Vector> vectors;
    vectors.reserve(pool.size());
    for (const auto& id : pool) {
        const auto it = context.embeddings->find(id);
        if (it == context.embeddings->end()) {
            throw DataError("no embedding for document " + id);
        }
        vectors.push_back(it->second);
    }
    const auto index = build_vector_index(std::move(ids), vectors, vector_kind(kind), config.vector);
    auto list = index->search(query.vector, config.k);
    list.query_id = query.query_id;
    return list;
}

RankedList single_list(const IssueQuery& query, std::span<const std::string> pool, RetrieverKind kind,
                       const RetrieverConfig& config, const RetrievalContext& context) {
    return is_sparse(kind) ? sparse_list(query, pool, kind, config, context)
                           : dense_list(query, pool, kind, config, context);
}

} // namespace

std::string_view to_string(RetrieverKind kind) {
    switch (kind) {
    case RetrieverKind::bm25:
        return "bm25";
    case RetrieverKind::bm25l:
        return "bm25l";
    case RetrieverKind::flat:
        return "flat";
    case RetrieverKind::hnsw:
        return "hnsw";
    case RetrieverKind::lsh:
        return "lsh";
    case RetrieverKind::rp_forest:
        return "rp_forest";
    case RetrieverKind::rrf:
        return "rrf";
    }
    return "bm25";
}

std::optional<RetrieverKind> parse_retriever_kind(std::string_view text) {
    for (const auto kind : kKinds) {
        if (text == to_string(kind)) {
            return kind;
        }
    }
    return std::nullopt;
}

bool is_sparse(RetrieverKind kind) { return kind == RetrieverKind::bm25 || kind == RetrieverKind::bm25l; }

bool is_dense(RetrieverKind kind) { return !is_sparse(kind) && kind != RetrieverKind::rrf; }

void RetrieverConfig::validate() const {
    if (name.empty()) {
        throw ConfigError("retriever name must not be empty");
    }
    if (k == 0) {
        throw ConfigError("retriever " + name + ": k must be at least 1");
    }
    if (kind == RetrieverKind::rrf) {
        if (!is_sparse(sparse)) {
            throw ConfigError("retriever " + name + ": rrf sparse component must be bm25 or bm25l");
        }
        if (!is_dense(dense)) {
            throw ConfigError("retriever " + name + ": rrf dense component must be a vector index kind");
        }
        if (rrf_k < 0 || top_n == 0) {
            throw ConfigError("retriever " + name + ": rrf_k must be >= 0 and top_n >= 1");
        }
    }
    if (bm25.k1 < 0 || bm25.b < 0 || bm25.b > 1 || bm25.epsilon < 0 || bm25.delta < 0) {
        throw ConfigError("retriever " + name + ": invalid bm25 parameters");
    }
}

void to_json(nlohmann::json& j, const RetrieverConfig& c) {
    j = nlohmann::json{{"name", c.name},
                       {"kind", to_string(c.kind)},
                       {"k", c.k},
                       {"scope", c.scope == SparseScope::global ? "global" : "pool"},
                       {"bm25", {{"k1", c.bm25.k1}, {"b", c.bm25.b}, {"epsilon", c.bm25.epsilon}, {"delta", c.bm25.delta}}},
                       {"vector", c.vector}};
    if (c.kind == RetrieverKind::rrf) {
        j["sparse"] = to_string(c.sparse);
        j["dense"] = to_string(c.dense);
        j["rrf_k"] = c.rrf_k;
        j["top_n"] = c.top_n;
    }
}

DocumentStore::DocumentStore(std::vector<corpus::Document> docs) : docs_(std::move(docs)) {
    tokens_.reserve(docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        if (!index_.emplace(docs_[i].doc_id, i).second) {
            throw DataError("duplicate document id " + docs_[i].doc_id);
        }
        tokens_.push_back(tokenize(docs_[i].text));
    }
}

std::size_t DocumentStore::ordinal(const std::string& doc_id) const {
    const auto it = index_.find(doc_id);
    if (it == index_.end()) {
        throw DataError("unknown document " + doc_id);
    }
    return it->second;
}

RankedList retrieve_for_issue(const IssueQuery& query, std::span<const std::string> pool_doc_ids,
                              const RetrieverConfig& config, const RetrievalContext& context) {
    if (context.docs == nullptr) {
        throw PrerequisiteError("retrieval context has no document store");
    }
    if (pool_doc_ids.empty()) {
        spdlog::warn("{}: empty candidate pool for {}", config.name, query.query_id);
        return RankedList{query.query_id, {}, config.name};
    }
    RankedList list;
    if (config.kind == RetrieverKind::rrf) {
        const std::array parts{single_list(query, pool_doc_ids, config.sparse, config, context),
                               single_list(query, pool_doc_ids, config.dense, config, context)};
        list = rrf_fuse(parts, config.rrf_k, config.top_n);
    } else {
        list = single_list(query, pool_doc_ids, config.kind, config, context);
    }
    list.query_id = query.query_id;
    list.provenance = config.name;
    return list;
}

SparseIndex build_global_sparse_index(const DocumentStore& docs, RetrieverKind kind, const Bm25Params& params) {
    if (!is_sparse(kind)) {
        throw ConfigError("global index requires a sparse retriever kind");
    }
    std::vector<std::string> ids;
    std::vector<TokenStream> tokens;
    ids.reserve(docs.size());
    tokens.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        ids.push_back(docs.documents()[i].doc_id);
        tokens.push_back(docs.tokens(i));
    }
    return SparseIndex::build(std::move(ids), tokens, sparse_variant(kind), params);
}

} // namespace commitlink::retrieval
