#include "commitlink/rerank/frlink.hpp"

#include "commitlink/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace commitlink::rerank {

double frlink_threshold(std::span<const double> positive_scores) {
    if (positive_scores.size() < kFrlinkMinPositives) {
        throw DataError("frlink threshold needs at least " + std::to_string(kFrlinkMinPositives) +
                        " positive pairs, got " + std::to_string(positive_scores.size()));
    }
    std::vector<double> sorted(positive_scores.begin(), positive_scores.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    // Keep ceil(0.9 n) scores at or above the threshold; the epsilon absorbs
    // 0.9 not being exact in binary.
    const auto keep = static_cast<std::size_t>(std::ceil(kFrlinkTargetRecall * static_cast<double>(n) - 1e-9));
    return sorted[n - keep];
}

void to_json(nlohmann::json& j, const FrlinkModel& model) {
    j = nlohmann::json{{"format_version", 1}, {"positives", model.positives}};
    j["threshold"] = model.threshold ? nlohmann::json(*model.threshold) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, FrlinkModel& model) {
    if (j.at("format_version").get<int>() != 1) {
        throw DataError("unsupported frlink model version");
    }
    model.positives = j.at("positives").get<std::size_t>();
    const auto& t = j.at("threshold");
    model.threshold = t.is_null() ? std::nullopt : std::optional<double>(t.get<double>());
}

} // namespace commitlink::rerank
