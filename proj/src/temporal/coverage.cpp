#include "commitlink/temporal/coverage.hpp"

#include <spdlog/spdlog.h>

#include <cstdio>
#include <unordered_map>

namespace commitlink::temporal {

namespace {

using corpus::query_id;

struct ResolvedLink {
    const corpus::IssueRecord* issue;
    const corpus::CommitRecord* commit;
};

} // namespace

std::vector<CoverageReport> coverage_sweep(std::span<const corpus::TrueLink> links,
                                           std::span<const corpus::IssueRecord> issues,
                                           std::span<const corpus::CommitRecord> commits,
                                           std::span<const WindowPolicy> policies) {
    std::unordered_map<std::string, const corpus::IssueRecord*> issue_by_id;
    for (const auto& issue : issues) {
        issue_by_id.emplace(query_id(issue), &issue);
    }
    std::unordered_map<std::string, const corpus::CommitRecord*> commit_by_id;
    for (const auto& commit : commits) {
        commit_by_id.emplace(query_id(commit.project_id, commit.hash), &commit);
    }

    std::vector<ResolvedLink> resolved;
    std::vector<corpus::TrueLink> unresolved;
    for (const auto& link : links) {
        const auto ii = issue_by_id.find(query_id(link.project_id, link.issue_key));
        const auto ci = commit_by_id.find(query_id(link.project_id, link.commit_hash));
        if (ii == issue_by_id.end() || ci == commit_by_id.end()) {
            unresolved.push_back(link);
            continue;
        }
        resolved.push_back({ii->second, ci->second});
    }
    if (!unresolved.empty()) {
        spdlog::warn("coverage: {} link(s) do not resolve to an ingested issue and commit", unresolved.size());
    }

    std::vector<CoverageReport> reports;
    for (const auto& policy : policies) {
        CoverageReport report;
        report.policy = policy;
        report.unresolved = unresolved;
        for (const auto& link : resolved) {
            auto& project = report.per_project[link.issue->project_id];
            ++project.total_links;
            ++report.total_links;
            for (const auto& iv : window_bounds(*link.issue, policy)) {
                if (iv.contains(link.commit->committed_at)) {
                    ++project.captured_links;
                    ++report.captured_links;
                    break;
                }
            }
        }
        for (auto& [_, project] : report.per_project) {
            project.coverage = project.total_links > 0 ? static_cast<double>(project.captured_links) /
                                                             static_cast<double>(project.total_links)
                                                       : 0.0;
        }
        report.coverage = report.total_links > 0 ? static_cast<double>(report.captured_links) /
                                                       static_cast<double>(report.total_links)
                                                 : 0.0;
        reports.push_back(std::move(report));
    }
    return reports;
}

CoverageReport coverage(std::span<const corpus::TrueLink> links, std::span<const corpus::IssueRecord> issues,
                        std::span<const corpus::CommitRecord> commits, const WindowPolicy& policy) {
    return coverage_sweep(links, issues, commits, std::span(&policy, 1)).front();
}

nlohmann::json to_json(const CoverageReport& report) {
    nlohmann::json per_project = nlohmann::json::object();
    for (const auto& [id, p] : report.per_project) {
        per_project[id] = {{"total_links", p.total_links}, {"captured_links", p.captured_links}, {"coverage", p.coverage}};
    }
    return {{"policy", report.policy},
            {"label", report.policy.label()},
            {"total_links", report.total_links},
            {"captured_links", report.captured_links},
            {"coverage", report.coverage},
            {"per_project", per_project},
            {"unresolved_links", report.unresolved}};
}

std::string format_coverage_table(std::span<const CoverageReport> reports) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-44s %10s %10s %9s\n", "Policy", "Captured", "Total", "Coverage");
    out += line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof(line), "%-44s %10zu %10zu %9.3f\n", r.policy.label().c_str(), r.captured_links,
                      r.total_links, r.coverage);
        out += line;
        for (const auto& [id, p] : r.per_project) {
            std::snprintf(line, sizeof(line), "  %-42s %10zu %10zu %9.3f\n", id.c_str(), p.captured_links,
                          p.total_links, p.coverage);
            out += line;
        }
    }
    return out;
}

} // namespace commitlink::temporal
