#include "doctest.h"
#include "oracles.hpp"

#include "commitlink/common/errors.hpp"
#include "commitlink/eval/metrics.hpp"
#include "commitlink/eval/report.hpp"
#include "commitlink/eval/split.hpp"

#include <random>

using namespace commitlink;
using namespace commitlink::eval;
using retrieval::RankedList;

namespace {

RankedList list_of(const std::vector<std::string>& ids, std::string qid = "q") {
    RankedList l{std::move(qid), {}, "t"};
    for (std::size_t i = 0; i < ids.size(); ++i) {
        l.entries.push_back({ids[i], static_cast<double>(ids.size() - i)});
    }
    return l;
}

corpus::IssueRecord issue(std::string key, int day) {
    corpus::IssueRecord i;
    i.project_id = "p";
    i.issue_key = std::move(key);
    i.created_at = add_days(*parse_timestamp("2023-01-01T00:00:00Z"), day);
    return i;
}

} // namespace

TEST_CASE("worked examples") {
    const auto m = metrics_at_k(list_of({"a", "x", "b"}), {"a", "b"}, 3);
    CHECK(m.precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.recall == 1.0);
    CHECK(m.hit == 1.0);
    CHECK(m.mrr == 1.0);
    CHECK(m.ndcg == doctest::Approx(1.5 / (1.0 + 1.0 / std::log2(3.0))));
    CHECK(m.ndcg == doctest::Approx(0.9197).epsilon(1e-4));

    const auto miss = metrics_at_k(list_of({"x", "y", "z", "a"}), {"a"}, 3);
    CHECK(miss == MetricValues{});
    const auto one = metrics_at_k(list_of({"a"}), {"a"}, 1);
    CHECK(one == MetricValues{1, 1, 1, 1, 1});
    CHECK(reciprocal_rank(list_of({"x", "y", "z", "a"}), {"a"}) == 0.25);
    CHECK(first_relevant_rank(list_of({"x", "a"}), {"a"}) == 2);
    CHECK_THROWS_AS(metrics_at_k(list_of({"a"}), {"a"}, 0), std::invalid_argument);
    CHECK_THROWS_AS(metrics_at_k(list_of({"a"}), {}, 1), std::invalid_argument);
}

TEST_CASE("metric properties hold on random rankings") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> ids;
        for (int d = 0; d < 40; ++d) {
            ids.push_back("d" + std::to_string(d));
        }
        std::shuffle(ids.begin(), ids.end(), rng);
        std::set<std::string> relevant(ids.begin(), ids.begin() + std::uniform_int_distribution<int>(1, 5)(rng));
        std::shuffle(ids.begin(), ids.end(), rng);
        ids.resize(std::uniform_int_distribution<std::size_t>(0, 40)(rng));
        const auto list = list_of(ids);
        MetricValues previous;
        for (std::size_t k = 1; k <= 45; ++k) {
            const auto m = metrics_at_k(list, relevant, k);
            const auto o = test_support::oracle_metrics(ids, relevant, k);
            REQUIRE(m.precision == doctest::Approx(o.precision).epsilon(1e-12));
            REQUIRE(m.ndcg == doctest::Approx(o.ndcg).epsilon(1e-12));
            REQUIRE((m.hit == 1.0) == (m.recall > 0.0));
            REQUIRE((m.hit == 1.0) == (m.mrr > 0.0));
            REQUIRE(m.precision * static_cast<double>(k) ==
                    doctest::Approx(m.recall * static_cast<double>(relevant.size())));
            REQUIRE(m.recall >= previous.recall);
            REQUIRE(m.hit >= previous.hit);
            REQUIRE(m.mrr >= previous.mrr);
            previous = m;
        }
    }
    // All relevant docs on top: NDCG is 1 for every k.
    const auto perfect = list_of({"a", "b", "x", "y"});
    for (std::size_t k = 1; k <= 5; ++k) {
        CHECK(metrics_at_k(perfect, {"a", "b"}, k).ndcg == doctest::Approx(1.0));
    }
}

TEST_CASE("evaluate_run aggregates per sample and excludes unjudged queries") {
    const std::map<std::string, RankedList> lists{{"q1", list_of({"a", "b"}, "q1")},
                                                  {"q2", list_of({"x", "c"}, "q2")},
                                                  {"q3", list_of({"z"}, "q3")}};
    const Judgments judgments{{"q1", {"a"}}, {"q2", {"c"}}, {"q4", {"d"}}};
    const std::vector<std::size_t> ks{1, 2};
    const auto report = evaluate_run(lists, judgments, ks, "bm25", "fp");
    CHECK(report.query_count == 3);
    CHECK(report.excluded_queries == 1);
    CHECK(report.means.at(1).precision == doctest::Approx(1.0 / 3.0));
    CHECK(report.means.at(2).hit == doctest::Approx(2.0 / 3.0));
    CHECK(report.mrr_unbounded == doctest::Approx((1.0 + 0.5 + 0.0) / 3.0));
    REQUIRE(report.rows.size() == 3);
    CHECK_FALSE(report.rows[2].has_list);

    // Means recomputed from the per-query table agree exactly.
    for (const auto k : ks) {
        double sum = 0.0;
        for (const auto& row : report.rows) {
            sum += row.at_k.at(k).ndcg;
        }
        CHECK(report.means.at(k).ndcg == sum / 3.0);
    }

    const std::vector<std::vector<std::string>> samples{{"q1"}, {"q1", "q2"}};
    const auto sampled = evaluate_run(lists, judgments, ks, samples, "s");
    CHECK(sampled.means.at(1).precision == doctest::Approx((1.0 + 0.5) / 2.0));

    const auto perfect = evaluate_run({{"q1", list_of({"a"}, "q1")}}, {{"q1", {"a"}}}, ks);
    CHECK(perfect.means.at(1) == MetricValues{1, 1, 1, 1, 1});
    CHECK_THROWS_AS(evaluate_run(lists, Judgments{}, ks), DataError);

    const auto json = to_json(report);
    CHECK(json.at("query_count") == 3);
    const std::vector<EvaluationReport> reports{report};
    const auto table = format_table(reports, summary_columns());
    CHECK(table.find("P@1") != std::string::npos);
    CHECK(table.find("NDCG@20") != std::string::npos);
    CHECK(table.find(" - ") != std::string::npos);
    CHECK(column_label(Metric::mrr, 10) == "MRR@10");
}

TEST_CASE("chronological split puts the newest issues in test") {
    std::vector<corpus::IssueRecord> issues;
    for (int i = 0; i < 10; ++i) {
        issues.push_back(issue("P-" + std::to_string(i), 10 - i));  // P-0 is the newest
    }
    issues.push_back(issue("P-10", 1));  // ties with P-9 on created_at
    const auto split = chrono_split(issues, 0.2);
    REQUIRE(split.test.size() == 3);
    CHECK(split.train.size() == 8);
    CHECK(split.test.back() == "p/P-0");
    CHECK(split.train.front() == "p/P-10");
    CHECK(split.train[1] == "p/P-9");
    CHECK(split.boundary == issues[2].created_at);
    nlohmann::json j = split;
    CHECK(j.get<ChronoSplit>().test == split.test);

    CHECK_THROWS_AS(chrono_split(std::span(issues).first(4)), DataError);
    CHECK_THROWS_AS(chrono_split(issues, 1.0), ConfigError);
    CHECK(chrono_split(std::span(issues).first(5), 0.01).test.size() == 1);
}

TEST_CASE("test samples are seeded, sorted and without replacement") {
    std::vector<std::string> ids;
    for (int i = 0; i < 50; ++i) {
        ids.push_back("q" + std::to_string(i));
    }
    const auto a = sample_test(ids, 10, 5, 99);
    CHECK(a == sample_test(ids, 10, 5, 99));
    CHECK(a != sample_test(ids, 10, 5, 100));
    REQUIRE(a.size() == 5);
    for (const auto& s : a) {
        CHECK(s.size() == 10);
        CHECK(std::is_sorted(s.begin(), s.end()));
        CHECK(std::set<std::string>(s.begin(), s.end()).size() == 10);
    }
    const auto whole = sample_test(ids, 1000, 5, 1);
    REQUIRE(whole.size() == 1);
    CHECK(whole[0].size() == 50);
}
