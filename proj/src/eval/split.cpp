#include "commitlink/eval/split.hpp"

#include "commitlink/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace commitlink::eval {

ChronoSplit chrono_split(std::span<const corpus::IssueRecord> issues, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ConfigError("test ratio must lie in (0, 1)");
    }
    if (issues.size() < kMinSplitIssues) {
        throw DataError("chronological split needs at least " + std::to_string(kMinSplitIssues) + " issues, got " +
                        std::to_string(issues.size()));
    }
    std::vector<const corpus::IssueRecord*> sorted;
    sorted.reserve(issues.size());
    for (const auto& i : issues) {
        sorted.push_back(&i);
    }
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        if (a->created_at != b->created_at) {
            return a->created_at < b->created_at;
        }
        return a->issue_key < b->issue_key;
    });
    const auto n = sorted.size();
    // The epsilon keeps e.g. 0.2 * 10 from rounding up to 3.
    auto n_test = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
    ChronoSplit split;
    split.ratio = ratio;
    for (std::size_t i = 0; i < n; ++i) {
        (i < n - n_test ? split.train : split.test).push_back(corpus::query_id(*sorted[i]));
    }
    split.boundary = sorted[n - n_test]->created_at;
    return split;
}

std::vector<std::vector<std::string>> sample_test(std::span<const std::string> test, std::size_t n,
                                                  std::size_t repeats, std::uint64_t seed) {
    if (test.size() <= n) {
        std::vector<std::string> all(test.begin(), test.end());
        std::sort(all.begin(), all.end());
        return {all};
    }
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::string>> samples;
    samples.reserve(repeats);
    std::vector<std::size_t> idx(test.size());
    for (std::size_t r = 0; r < repeats; ++r) {
        std::iota(idx.begin(), idx.end(), 0);
        // Partial Fisher-Yates: the first n slots become the sample.
        for (std::size_t i = 0; i < n; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
            std::swap(idx[i], idx[pick(rng)]);
        }
        std::vector<std::string> sample;
        sample.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            sample.push_back(test[idx[i]]);
        }
        std::sort(sample.begin(), sample.end());
        samples.push_back(std::move(sample));
    }
    return samples;
}

void to_json(nlohmann::json& j, const ChronoSplit& s) {
    j = nlohmann::json{{"ratio", s.ratio}, {"boundary", format_timestamp(s.boundary)}, {"train", s.train},
                       {"test", s.test}};
}

void from_json(const nlohmann::json& j, ChronoSplit& s) {
    s.ratio = j.at("ratio").get<double>();
    const auto boundary = parse_timestamp(j.at("boundary").get<std::string>());
    if (!boundary) {
        throw DataError("split has an invalid boundary timestamp");
    }
    s.boundary = *boundary;
    s.train = j.at("train").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
}

} // namespace commitlink::eval
