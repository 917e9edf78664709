#pragma once

#include "commitlink/temporal/window.hpp"

#include "json.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace commitlink::temporal {

struct ProjectCoverage {
    std::size_t total_links = 0;
    std::size_t captured_links = 0;
    double coverage = 0.0;
};

struct CoverageReport {
    WindowPolicy policy;
    std::size_t total_links = 0;
    std::size_t captured_links = 0;
    double coverage = 0.0;  ///< captured / total; 0 when there are no links
    std::map<std::string, ProjectCoverage> per_project;
    std::vector<corpus::TrueLink> unresolved;  ///< excluded from both counts
};

/// A link is captured when its commit's timestamp falls inside the issue's
/// window_bounds under `policy`.
CoverageReport coverage(std::span<const corpus::TrueLink> links, std::span<const corpus::IssueRecord> issues,
                        std::span<const corpus::CommitRecord> commits, const WindowPolicy& policy);

/// One report per policy.
std::vector<CoverageReport> coverage_sweep(std::span<const corpus::TrueLink> links,
                                           std::span<const corpus::IssueRecord> issues,
                                           std::span<const corpus::CommitRecord> commits,
                                           std::span<const WindowPolicy> policies);

nlohmann::json to_json(const CoverageReport& report);
std::string format_coverage_table(std::span<const CoverageReport> reports);

} // namespace commitlink::temporal
