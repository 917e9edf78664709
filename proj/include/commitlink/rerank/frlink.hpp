#pragma once

#include "json.hpp"

#include <optional>
#include <span>

namespace commitlink::rerank {

inline constexpr std::size_t kFrlinkMinPositives = 10;
inline constexpr double kFrlinkTargetRecall = 0.9;

/// Largest t such that at least 90% of the positive scores are >= t, i.e.
/// the 10th percentile taken from below. Throws DataError with fewer than
/// kFrlinkMinPositives scores.
double frlink_threshold(std::span<const double> positive_scores);

/// TF-IDF threshold model. Ranking uses the raw TF-IDF cosine; the
/// threshold only matters for link/non-link classification.
struct FrlinkModel {
    std::optional<double> threshold;  ///< absent when training had too few positives
    std::size_t positives = 0;

    /// False when a threshold is set and the score falls below it.
    bool is_link(double score) const { return !threshold || score >= *threshold; }
};

void to_json(nlohmann::json& j, const FrlinkModel& model);
void from_json(const nlohmann::json& j, FrlinkModel& model);

} // namespace commitlink::rerank
