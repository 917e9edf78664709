#pragma once

#include "commitlink/retrieval/tokenizer.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace commitlink::rerank {

/// (term id, weight) pairs sorted by term id.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

/// TF-IDF with raw term counts, smoothed idf ln((1 + N) / (1 + df)) + 1 and
/// L2-normalised vectors; terms outside the fitted vocabulary are dropped.
class TfidfModel {
public:
    TfidfModel() = default;
    static TfidfModel fit(std::span<const retrieval::TokenStream> docs);

    std::size_t vocabulary_size() const { return idf_.size(); }
    std::size_t doc_count() const { return doc_count_; }
    /// 0 for out-of-vocabulary terms.
    double idf(const std::string& term) const;

    SparseVector transform(const retrieval::TokenStream& tokens) const;

    /// Cosine of the two transformed streams; 0 when either is empty.
    double similarity(const retrieval::TokenStream& a, const retrieval::TokenStream& b) const;

private:
    std::unordered_map<std::string, std::uint32_t> vocab_;
    std::vector<double> idf_;
    std::size_t doc_count_ = 0;
};

/// Dot product of two sorted, non-negative unit vectors, clamped to [0, 1].
double sparse_dot(const SparseVector& a, const SparseVector& b);

} // namespace commitlink::rerank
