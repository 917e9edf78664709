#pragma once

#include "commitlink/retrieval/ranked_list.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>

namespace commitlink::eval {

/// Relevant doc_ids per query_id (binary relevance).
using Judgments = std::map<std::string, std::set<std::string>>;

struct MetricValues {
    double precision = 0.0;
    double hit = 0.0;
    double recall = 0.0;
    double mrr = 0.0;   ///< reciprocal rank truncated at k
    double ndcg = 0.0;

    bool operator==(const MetricValues&) const = default;
};

/// 1-based rank of the first relevant entry.
std::optional<std::size_t> first_relevant_rank(const retrieval::RankedList& ranked,
                                               const std::set<std::string>& relevant);

/// Precision = Rel/k, Hit = [first relevant rank <= k], Recall = Rel/TotalRel,
/// MRR = 1/rank of the first relevant if within k, NDCG with binary gains and
/// log2(i + 1) discounts normalised by the ideal DCG over min(TotalRel, k)
/// positions. Throws std::invalid_argument for k = 0 or no relevant docs.
MetricValues metrics_at_k(const retrieval::RankedList& ranked, const std::set<std::string>& relevant, std::size_t k);

/// Untruncated reciprocal rank (0 when no relevant doc is ranked).
double reciprocal_rank(const retrieval::RankedList& ranked, const std::set<std::string>& relevant);

} // namespace commitlink::eval
