#pragma once

#include "commitlink/common/time.hpp"
#include "commitlink/corpus/records.hpp"

#include "json.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace commitlink::eval {

inline constexpr double kDefaultTestRatio = 0.2;
inline constexpr std::size_t kMinSplitIssues = 5;

/// Query ids of one chronological split.
struct ChronoSplit {
    std::vector<std::string> train;  ///< oldest first
    std::vector<std::string> test;   ///< oldest first
    Timestamp boundary{};            ///< created_at of the oldest test issue
    double ratio = kDefaultTestRatio;
};

/// Sorts by (created_at, issue_key) and puts the newest ceil(ratio * n)
/// issues in test. Throws DataError with fewer than kMinSplitIssues issues
/// and ConfigError for a ratio outside (0, 1).
ChronoSplit chrono_split(std::span<const corpus::IssueRecord> issues, double ratio = kDefaultTestRatio);

/// The whole test set as one sample when it has at most n issues; otherwise
/// `repeats` seeded samples of n issues drawn without replacement. Each
/// sample is sorted.
std::vector<std::vector<std::string>> sample_test(std::span<const std::string> test, std::size_t n,
                                                  std::size_t repeats, std::uint64_t seed);

void to_json(nlohmann::json& j, const ChronoSplit& split);
void from_json(const nlohmann::json& j, ChronoSplit& split);

} // namespace commitlink::eval
