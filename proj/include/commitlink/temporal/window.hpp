#pragma once

#include "commitlink/corpus/records.hpp"

#include "json.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace commitlink::temporal {

/// Which commits are candidates for an issue: a window around creation,
/// optionally united with buffers around closure. Days are exact 86,400 s.
struct WindowPolicy {
    int creation_after_days = 365;
    int creation_before_days = 0;
    std::optional<int> closure_before_days = 30;
    std::optional<int> closure_after_days = 30;

    static WindowPolicy creation_only(int after_days, int before_days = 0);
    static WindowPolicy hybrid(int after_days, int closure_buffer_days);

    bool closure_enabled() const { return closure_before_days.has_value() || closure_after_days.has_value(); }

    /// Throws ConfigError on negative values or when nothing is enabled.
    void validate() const;

    /// Short human-readable form, e.g. "create[-0d,+365d] close[-30d,+30d]".
    std::string label() const;

    bool operator==(const WindowPolicy&) const = default;
};

void to_json(nlohmann::json& j, const WindowPolicy& policy);
void from_json(const nlohmann::json& j, WindowPolicy& policy);

/// Closed interval [begin, end].
struct Interval {
    Timestamp begin{};
    Timestamp end{};

    bool contains(Timestamp t) const { return begin <= t && t <= end; }
    bool operator==(const Interval&) const = default;
};

/// Creation interval plus, when the closure is usable and buffers are set,
/// the closure interval; sorted and merged.
std::vector<Interval> window_bounds(const corpus::IssueRecord& issue, const WindowPolicy& policy);

/// Commits sorted by (committed_at, hash) for repeated range lookups.
class CommitTimeline {
public:
    explicit CommitTimeline(std::span<const corpus::CommitRecord> commits);

    /// Indices into the original span of every commit inside the issue's
    /// window, in timeline order.
    std::vector<std::size_t> pool(const corpus::IssueRecord& issue, const WindowPolicy& policy) const;

    std::size_t size() const { return order_.size(); }

private:
    std::span<const corpus::CommitRecord> commits_;
    std::vector<std::size_t> order_;
    std::vector<Timestamp> times_;  // committed_at in timeline order
};

/// Commits inside the issue's window, sorted by committed_at ascending (hash
/// breaks ties).
std::vector<corpus::CommitRecord> candidate_pool(const corpus::IssueRecord& issue,
                                                 std::span<const corpus::CommitRecord> commits,
                                                 const WindowPolicy& policy);

} // namespace commitlink::temporal
