#pragma once

#include "commitlink/corpus/records.hpp"
#include "commitlink/retrieval/ranked_list.hpp"
#include "commitlink/retrieval/tokenizer.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace commitlink::retrieval {

enum class SparseVariant { bm25, bm25l };

/// Defaults follow the rank-bm25 package.
struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;
    double epsilon = 0.25;  ///< bm25: floor for negative idf, as a fraction of mean idf
    double delta = 0.5;     ///< bm25l: length-normalised tf shift

    bool operator==(const Bm25Params&) const = default;
};

/// Term statistics for BM25-family scoring, matching rank-bm25's BM25Okapi and
/// BM25L formulations:
///
///   bm25:  idf(t) = ln(N - n_t + 0.5) - ln(n_t + 0.5), negative values replaced
///          by epsilon * mean(idf);
///          score += idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))
///   bm25l: idf(t) = ln(N + 1) - ln(n_t + 0.5);
///          ctd = tf / (1 - b + b * dl / avgdl);
///          score += idf(t) * (k1 + 1) * (ctd + delta) / (k1 + ctd + delta)
///
/// Query terms are summed with multiplicity and unknown terms contribute 0.
/// In bm25l every document receives the delta credit for a known query term,
/// including documents that do not contain it; rank-bm25 behaves the same way.
class SparseIndex {
public:
    /// Throws DataError for an empty corpus.
    static SparseIndex build(std::span<const corpus::Document> docs, SparseVariant variant, Bm25Params params = {});
    static SparseIndex build(std::vector<std::string> doc_ids, std::span<const TokenStream> doc_tokens,
                             SparseVariant variant, Bm25Params params = {});

    SparseVariant variant() const { return variant_; }
    const Bm25Params& params() const { return params_; }
    std::size_t doc_count() const { return doc_ids_.size(); }
    double avg_doc_len() const { return avg_doc_len_; }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }

    std::size_t doc_freq(const std::string& term) const;
    std::size_t term_freq(std::size_t doc, const std::string& term) const;
    std::size_t doc_len(std::size_t doc) const { return doc_len_[doc]; }
    /// 0 for unknown terms.
    double idf(const std::string& term) const;
    std::size_t vocabulary_size() const { return terms_.size(); }

    /// Scores of every indexed document, in index order.
    std::vector<double> scores(const TokenStream& query) const;
    double score(const TokenStream& query, std::size_t doc) const;

    /// Scores a document that is not part of the index against the index's
    /// statistics.
    double score_external(const TokenStream& query, const TokenStream& doc_tokens) const;

    /// Top-k by score (ties by doc_id). Zero-score documents only pad to k.
    RankedList search(const TokenStream& query, std::size_t k, const std::string& query_id = {}) const;

    /// Top-k restricted to the given document ordinals.
    RankedList search_subset(const TokenStream& query, std::size_t k, std::span<const std::size_t> docs,
                             const std::string& query_id = {}) const;

    void save(std::ostream& out) const;
    static SparseIndex load(std::istream& in);

    bool operator==(const SparseIndex&) const = default;

private:
    struct Posting {
        std::uint32_t doc;
        std::uint32_t tf;
        bool operator==(const Posting&) const = default;
    };

    void finalize();
    double term_weight(double idf, double tf, double dl) const;
    const std::string& provenance() const;

    SparseVariant variant_ = SparseVariant::bm25;
    Bm25Params params_;
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> doc_len_;
    double avg_doc_len_ = 0.0;
    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::uint32_t> term_index_;
    std::vector<std::vector<Posting>> postings_;  // per term, ascending doc
    std::vector<double> idf_;
};

std::string_view to_string(SparseVariant variant);

} // namespace commitlink::retrieval
