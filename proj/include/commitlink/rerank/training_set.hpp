#pragma once

#include "commitlink/retrieval/ranked_list.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace commitlink::rerank {

inline constexpr std::size_t kDefaultNegativesPerIssue = 10;

struct TrainingPair {
    std::string query_id;
    std::string doc_id;
    bool positive = false;
    std::optional<std::size_t> retrieval_rank;  ///< 1-based rank in the candidate list, if present

    bool operator==(const TrainingPair&) const = default;
};

void to_json(nlohmann::json& j, const TrainingPair& pair);

/// Hard-negative training set. For each training issue, in the given order:
/// every true link as a positive (doc_id ascending), then the first
/// `negatives_per_issue` candidates that are not true links, in retrieval
/// order. Issues without a candidate list contribute positives only.
std::vector<TrainingPair> make_training_set(std::span<const std::string> train_query_ids,
                                            const std::map<std::string, std::set<std::string>>& true_links,
                                            const std::map<std::string, retrieval::RankedList>& candidate_lists,
                                            std::size_t negatives_per_issue = kDefaultNegativesPerIssue);

} // namespace commitlink::rerank
