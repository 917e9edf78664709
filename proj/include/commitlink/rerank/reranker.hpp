#pragma once

#include "commitlink/retrieval/ranked_list.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace commitlink::rerank {

inline constexpr std::size_t kDefaultRerankK = 20;

/// Score given to a candidate whose scoring failed; it sorts below every
/// real score.
inline constexpr double kFailedScore = std::numeric_limits<double>::lowest();

/// Scores every candidate of one issue, in list order. An empty optional
/// marks a failed pair; throwing fails the whole batch.
using BatchScorer = std::function<std::vector<std::optional<double>>(const retrieval::RankedList& candidates)>;

struct RerankOutcome {
    retrieval::RankedList list;
    std::size_t failed_pairs = 0;
    bool fallback = false;  ///< the whole batch failed; retrieval order kept
    std::string error;
};

/// Reorders the candidates by scorer score descending, ties by original rank.
/// Failed pairs keep kFailedScore. The output holds exactly the input
/// doc_ids. Throws std::invalid_argument when more than k candidates are
/// given.
RerankOutcome rerank_with_model(const BatchScorer& scorer, const retrieval::RankedList& candidates,
                                std::size_t k = kDefaultRerankK, std::string provenance = {});

/// Scores each candidate with its retrieval score; output order equals input.
BatchScorer identity_scorer();

/// Adapts a per-pair function; exceptions from one pair mark only that pair.
BatchScorer per_pair_scorer(std::function<double(const retrieval::ScoredDoc& candidate)> score);

} // namespace commitlink::rerank
