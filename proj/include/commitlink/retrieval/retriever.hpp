#pragma once

#include "commitlink/corpus/records.hpp"
#include "commitlink/retrieval/embedding.hpp"
#include "commitlink/retrieval/fusion.hpp"
#include "commitlink/retrieval/ranked_list.hpp"
#include "commitlink/retrieval/sparse_index.hpp"
#include "commitlink/retrieval/tokenizer.hpp"
#include "commitlink/retrieval/vector_index.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace commitlink::retrieval {

enum class RetrieverKind { bm25, bm25l, flat, hnsw, lsh, rp_forest, rrf };

std::string_view to_string(RetrieverKind kind);
std::optional<RetrieverKind> parse_retriever_kind(std::string_view text);
bool is_sparse(RetrieverKind kind);
bool is_dense(RetrieverKind kind);

/// Where sparse statistics come from: the issue's own candidate pool, or the
/// whole project (scores then restricted to the pool).
enum class SparseScope { pool, global };

struct RetrieverConfig {
    std::string name;
    RetrieverKind kind = RetrieverKind::bm25;
    std::size_t k = 50;  ///< list depth; for rrf, the depth of each component list
    Bm25Params bm25;
    VectorIndexParams vector;
    SparseScope scope = SparseScope::pool;
    // rrf only
    RetrieverKind sparse = RetrieverKind::bm25;
    RetrieverKind dense = RetrieverKind::flat;
    int rrf_k = kDefaultRrfK;
    std::size_t top_n = kDefaultRrfTopN;

    /// Throws ConfigError for inconsistent settings.
    void validate() const;
};

void to_json(nlohmann::json& j, const RetrieverConfig& config);

/// Documents of one project with their token streams, addressable by doc_id.
class DocumentStore {
public:
    DocumentStore() = default;
    /// Throws DataError on duplicate doc_ids.
    explicit DocumentStore(std::vector<corpus::Document> docs);

    std::size_t size() const { return docs_.size(); }
    const std::vector<corpus::Document>& documents() const { return docs_; }
    bool contains(const std::string& doc_id) const { return index_.contains(doc_id); }
    /// Throws DataError for unknown ids.
    std::size_t ordinal(const std::string& doc_id) const;
    const corpus::Document& document(const std::string& doc_id) const { return docs_[ordinal(doc_id)]; }
    const TokenStream& tokens(const std::string& doc_id) const { return tokens_[ordinal(doc_id)]; }
    const TokenStream& tokens(std::size_t ordinal) const { return tokens_[ordinal]; }

private:
    std::vector<corpus::Document> docs_;
    std::vector<TokenStream> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Project-wide inputs shared by every issue. Pointers are non-owning;
/// embeddings are required by dense retrievers, global indexes by
/// global-scope sparse retrievers (built over `docs` in store order).
struct RetrievalContext {
    const DocumentStore* docs = nullptr;
    const std::map<std::string, Vector>* embeddings = nullptr;
    const SparseIndex* global_bm25 = nullptr;
    const SparseIndex* global_bm25l = nullptr;
};

struct IssueQuery {
    std::string query_id;
    TokenStream tokens;
    Vector vector;  ///< empty when no dense retriever is configured
};

/// Ranks the pool's documents for one issue. Single retrievers index the pool
/// and search it; rrf fuses the configured sparse and dense lists. An empty
/// pool yields an empty list and a warning.
RankedList retrieve_for_issue(const IssueQuery& query, std::span<const std::string> pool_doc_ids,
                              const RetrieverConfig& config, const RetrievalContext& context);

/// Builds the global index for a sparse kind over all documents in the store.
SparseIndex build_global_sparse_index(const DocumentStore& docs, RetrieverKind kind, const Bm25Params& params);

} // namespace commitlink::retrieval
