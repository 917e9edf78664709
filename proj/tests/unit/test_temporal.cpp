#include "doctest.h"
#include "synthetic.hpp"

#include "commitlink/common/errors.hpp"
#include "commitlink/common/hash.hpp"
#include "commitlink/temporal/coverage.hpp"
#include "commitlink/temporal/window.hpp"

#include <random>

using namespace commitlink;
using namespace commitlink::temporal;

namespace {

corpus::IssueRecord issue_at(Timestamp created, std::optional<Timestamp> closed) {
    corpus::IssueRecord i;
    i.project_id = "p";
    i.issue_key = "P-1";
    i.created_at = created;
    i.closed_at = closed;
    return i;
}

const Timestamp T0 = *parse_timestamp("2023-01-01T00:00:00Z");

} // namespace

TEST_CASE("hybrid bounds unite the creation window with the closure buffer") {
    const auto bounds = window_bounds(issue_at(T0, add_days(T0, 10)), WindowPolicy::hybrid(365, 30));
    // The closure interval [T0-20d, T0+40d] overlaps the creation window and merges with it.
    REQUIRE(bounds.size() == 1);
    CHECK(bounds[0].begin == add_days(T0, -20));
    CHECK(bounds[0].end == add_days(T0, 365));

    const auto late = window_bounds(issue_at(T0, add_days(T0, 500)), WindowPolicy::hybrid(365, 30));
    REQUIRE(late.size() == 2);
    CHECK(late[1].begin == add_days(T0, 470));
    CHECK(late[1].end == add_days(T0, 530));

    const auto open = window_bounds(issue_at(T0, std::nullopt), WindowPolicy::hybrid(365, 30));
    REQUIRE(open.size() == 1);
    const auto inverted = window_bounds(issue_at(T0, add_days(T0, -3)), WindowPolicy::hybrid(365, 30));
    CHECK(inverted == open);
}

TEST_CASE("policies validate and label themselves") {
    CHECK(WindowPolicy::hybrid(365, 30).label() == "create[-0d,+365d] close[-30d,+30d]");
    CHECK(WindowPolicy::creation_only(365).label() == "create[-0d,+365d]");
    auto bad = WindowPolicy::creation_only(365);
    bad.creation_after_days = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    nlohmann::json j = WindowPolicy::hybrid(180, 7);
    CHECK(j.get<WindowPolicy>() == WindowPolicy::hybrid(180, 7));
    CHECK_THROWS_AS((nlohmann::json{{"creation_afterdays", 3}}.get<WindowPolicy>()), ConfigError);
}

TEST_CASE("timeline pools equal a linear scan over every commit") {
    const auto data = test_support::coverage_dataset(60, 3);
    const CommitTimeline timeline(data.commits);
    for (const auto& policy : {WindowPolicy::hybrid(365, 30), WindowPolicy::creation_only(100, 5)}) {
        for (const auto& issue : data.issues) {
            const auto bounds = window_bounds(issue, policy);
            std::vector<std::string> expected;
            for (const auto& c : data.commits) {
                bool in = false;
                for (const auto& b : bounds) {
                    in = in || b.contains(c.committed_at);
                }
                if (in) {
                    expected.push_back(c.hash);
                }
            }
            std::vector<std::string> got;
            for (const auto i : timeline.pool(issue, policy)) {
                got.push_back(data.commits[i].hash);
            }
            std::sort(expected.begin(), expected.end());
            auto sorted = got;
            std::sort(sorted.begin(), sorted.end());
            REQUIRE(sorted == expected);
            const auto pool = candidate_pool(issue, data.commits, policy);
            REQUIRE(pool.size() == got.size());
            for (std::size_t i = 1; i < pool.size(); ++i) {
                REQUIRE(pool[i - 1].committed_at <= pool[i].committed_at);
            }
        }
    }
}

TEST_CASE("coverage counts, per-project breakdown and unresolved links") {
    const auto data = test_support::coverage_dataset(40, 9);
    const auto report = coverage(data.links, data.issues, data.commits, WindowPolicy::hybrid(365, 30));
    CHECK(report.unresolved.size() == 3);
    CHECK(report.total_links == data.links.size() - 3);
    CHECK(report.per_project.at("cov").captured_links == report.captured_links);
    CHECK(report.coverage == doctest::Approx(static_cast<double>(report.captured_links) / report.total_links));

    // Everything inside every window: all rows are 1.0.
    std::vector<corpus::CommitRecord> commits;
    std::vector<corpus::TrueLink> links;
    for (const auto& i : data.issues) {
        corpus::CommitRecord c;
        c.project_id = "cov";
        c.hash = sha256_hex(i.issue_key).substr(0, 12);
        c.committed_at = add_days(i.created_at, 1);
        commits.push_back(c);
        links.push_back({"cov", i.issue_key, c.hash});
    }
    const std::vector<WindowPolicy> policies{WindowPolicy::creation_only(365), WindowPolicy::hybrid(365, 7)};
    for (const auto& r : coverage_sweep(links, data.issues, commits, policies)) {
        CHECK(r.coverage == 1.0);
    }
    const auto one = coverage_sweep(links, data.issues, commits, std::vector<WindowPolicy>{policies[0]});
    CHECK(one.size() == 1);
    const auto table = format_coverage_table(one);
    CHECK(table.find("1.000") != std::string::npos);
}
