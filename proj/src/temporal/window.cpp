#include "commitlink/temporal/window.hpp"

#include "commitlink/common/errors.hpp"

#include <algorithm>
#include <numeric>

namespace commitlink::temporal {

WindowPolicy WindowPolicy::creation_only(int after_days, int before_days) {
    WindowPolicy p;
    p.creation_after_days = after_days;
    p.creation_before_days = before_days;
    p.closure_before_days.reset();
    p.closure_after_days.reset();
    return p;
}

WindowPolicy WindowPolicy::hybrid(int after_days, int closure_buffer_days) {
    WindowPolicy p;
    p.creation_after_days = after_days;
    p.creation_before_days = 0;
    p.closure_before_days = closure_buffer_days;
    p.closure_after_days = closure_buffer_days;
    return p;
}

void WindowPolicy::validate() const {
    if (creation_after_days < 0 || creation_before_days < 0 || closure_before_days.value_or(0) < 0 ||
        closure_after_days.value_or(0) < 0) {
        throw ConfigError("window policy values must be non-negative");
    }
    if (creation_after_days == 0 && creation_before_days == 0 && !closure_enabled()) {
        throw ConfigError("window policy enables neither a creation window nor closure buffers");
    }
}

std::string WindowPolicy::label() const {
    std::string s = "create[-" + std::to_string(creation_before_days) + "d,+" +
                    std::to_string(creation_after_days) + "d]";
    if (closure_enabled()) {
        s += " close[-" + std::to_string(closure_before_days.value_or(0)) + "d,+" +
             std::to_string(closure_after_days.value_or(0)) + "d]";
    }
    return s;
}

void to_json(nlohmann::json& j, const WindowPolicy& policy) {
    j = nlohmann::json{{"creation_after_days", policy.creation_after_days},
                       {"creation_before_days", policy.creation_before_days},
                       {"closure_before_days", policy.closure_before_days ? nlohmann::json(*policy.closure_before_days)
                                                                          : nlohmann::json()},
                       {"closure_after_days", policy.closure_after_days ? nlohmann::json(*policy.closure_after_days)
                                                                        : nlohmann::json()}};
}

void from_json(const nlohmann::json& j, WindowPolicy& policy) {
    if (!j.is_object()) {
        throw ConfigError("window policy must be an object");
    }
    policy = WindowPolicy::creation_only(365);
    for (const auto& [key, value] : j.items()) {
        if (key == "creation_after_days") {
            policy.creation_after_days = value.get<int>();
        } else if (key == "creation_before_days") {
            policy.creation_before_days = value.get<int>();
        } else if (key == "closure_before_days") {
            policy.closure_before_days = value.is_null() ? std::nullopt : std::optional<int>(value.get<int>());
        } else if (key == "closure_after_days") {
            policy.closure_after_days = value.is_null() ? std::nullopt : std::optional<int>(value.get<int>());
        } else {
            throw ConfigError("unknown window policy key '" + key + "'");
        }
    }
    policy.validate();
}

std::vector<Interval> window_bounds(const corpus::IssueRecord& issue, const WindowPolicy& policy) {
    std::vector<Interval> intervals;
    intervals.push_back({add_days(issue.created_at, -policy.creation_before_days),
                         add_days(issue.created_at, policy.creation_after_days)});
    if (const auto closed = issue.usable_closed_at(); closed && policy.closure_enabled()) {
        intervals.push_back({add_days(*closed, -policy.closure_before_days.value_or(0)),
                             add_days(*closed, policy.closure_after_days.value_or(0))});
    }
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
    std::vector<Interval> merged;
    for (const auto& iv : intervals) {
        if (!merged.empty() && iv.begin <= merged.back().end) {
            merged.back().end = std::max(merged.back().end, iv.end);
        } else {
            merged.push_back(iv);
        }
    }
    return merged;
}

CommitTimeline::CommitTimeline(std::span<const corpus::CommitRecord> commits) : commits_(commits) {
    order_.resize(commits.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        if (commits[a].committed_at != commits[b].committed_at) {
            return commits[a].committed_at < commits[b].committed_at;
        }
        return commits[a].hash < commits[b].hash;
    });
    times_.reserve(order_.size());
    for (const auto i : order_) {
        times_.push_back(commits[i].committed_at);
    }
}

std::vector<std::size_t> CommitTimeline::pool(const corpus::IssueRecord& issue, const WindowPolicy& policy) const {
    std::vector<std::size_t> out;
    // Merged intervals are disjoint and sorted, so the ranges come out in order.
    for (const auto& iv : window_bounds(issue, policy)) {
        const auto lo = std::lower_bound(times_.begin(), times_.end(), iv.begin);
        const auto hi = std::upper_bound(times_.begin(), times_.end(), iv.end);
        for (auto it = lo; it != hi; ++it) {
            out.push_back(order_[static_cast<std::size_t>(it - times_.begin())]);
        }
    }
    return out;
}

std::vector<corpus::CommitRecord> candidate_pool(const corpus::IssueRecord& issue,
                                                 std::span<const corpus::CommitRecord> commits,
                                                 const WindowPolicy& policy) {
    const CommitTimeline timeline(commits);
    std::vector<corpus::CommitRecord> pool;
    for (const auto i : timeline.pool(issue, policy)) {
        pool.push_back(commits[i]);
    }
    return pool;
}

} // namespace commitlink::temporal
