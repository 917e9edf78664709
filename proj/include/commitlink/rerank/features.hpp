#pragma once

#include "commitlink/corpus/issue_keys.hpp"
#include "commitlink/corpus/records.hpp"
#include "commitlink/rerank/tfidf.hpp"
#include "commitlink/retrieval/ranked_list.hpp"
#include "commitlink/retrieval/sparse_index.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

namespace commitlink::rerank {

/// Bumped whenever the feature list or a feature definition changes; stored
/// with every trained model.
inline constexpr int kFeatureSchemaVersion = 1;
inline constexpr std::size_t kFeatureCount = 16;

using FeatureVector = std::array<double, kFeatureCount>;

enum Feature : std::size_t {
    tfidf_cosine_message,
    tfidf_cosine_code,
    token_jaccard,
    shared_token_count,
    shared_rare_token_count,  ///< shared tokens with pool doc_freq <= 2
    query_length,
    document_length,
    bm25_score,
    days_since_creation,      ///< commit time minus issue creation, signed
    days_to_closure,          ///< issue closure minus commit time, signed; 0 without closure
    within_closure_buffer,
    author_is_reporter,
    author_is_assignee,
    changed_files,
    changed_methods,
    rrf_score,
};

const std::array<std::string_view, kFeatureCount>& feature_names();

/// Token views of one commit, computed once per project.
struct CandidateInfo {
    const corpus::CommitRecord* commit = nullptr;
    retrieval::TokenStream message_tokens;  ///< scrubbed message
    retrieval::TokenStream code_tokens;     ///< scrubbed code terms
    retrieval::TokenStream tokens;          ///< full retrieval document
};

CandidateInfo make_candidate_info(const corpus::CommitRecord& commit, const corpus::IssueKeyPattern& pattern);

struct FeatureOptions {
    int closure_before_days = 30;
    int closure_after_days = 30;
    retrieval::Bm25Params bm25;
};

/// Per-issue statistics: TF-IDF and BM25 fitted on the candidate pool, pool
/// document frequencies, and the candidate retriever's scores.
class FeatureContext {
public:
    FeatureContext(const corpus::IssueRecord& issue, retrieval::TokenStream query_tokens,
                   std::span<const CandidateInfo* const> pool, const retrieval::RankedList& retrieval_list,
                   FeatureOptions options = {});

    /// All features are finite. Commits outside the pool are scored against
    /// the pool statistics.
    FeatureVector extract(const CandidateInfo& candidate) const;

    /// TF-IDF cosine of the issue text and the full commit document.
    double frlink_score(const CandidateInfo& candidate) const;

    const TfidfModel& tfidf() const { return tfidf_; }
    const retrieval::TokenStream& query_tokens() const { return query_tokens_; }

private:
    corpus::IssueRecord issue_;
    retrieval::TokenStream query_tokens_;
    SparseVector query_vector_;
    FeatureOptions options_;
    TfidfModel tfidf_;
    std::unordered_map<std::string, std::size_t> pool_df_;
    std::optional<retrieval::SparseIndex> bm25_;
    std::unordered_map<std::string, std::size_t> pool_ordinal_;
    std::unordered_map<std::string, double> retrieval_scores_;
};

} // namespace commitlink::rerank
