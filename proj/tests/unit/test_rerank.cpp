#include "doctest.h"
#include "mock_server.hpp"

#include "commitlink/common/errors.hpp"
#include "commitlink/corpus/documents.hpp"
#include "commitlink/rerank/features.hpp"
#include "commitlink/rerank/forest.hpp"
#include "commitlink/rerank/frlink.hpp"
#include "commitlink/rerank/llm.hpp"
#include "commitlink/rerank/pairwise.hpp"
#include "commitlink/rerank/reranker.hpp"
#include "commitlink/rerank/tfidf.hpp"
#include "commitlink/rerank/training_set.hpp"

#include <cmath>
#include <random>

using namespace commitlink;
using namespace commitlink::rerank;
using retrieval::RankedList;
using retrieval::TokenStream;

namespace {

RankedList list_of(const std::vector<std::string>& ids, std::string qid = "q") {
    RankedList l{std::move(qid), {}, "t"};
    for (std::size_t i = 0; i < ids.size(); ++i) {
        l.entries.push_back({ids[i], static_cast<double>(ids.size() - i)});
    }
    return l;
}

std::vector<std::string> ids_in_order(const RankedList& l) {
    std::vector<std::string> out;
    for (const auto& e : l.entries) {
        out.push_back(e.doc_id);
    }
    return out;
}

Timestamp ts(const char* text) { return *parse_timestamp(text); }

/// Two-feature data: positive when x0 + x1 > 1.
Dataset separable(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Dataset d;
    d.n_features = 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::array<double, 2> x{u(rng), u(rng)};
        d.add(x, x[0] + x[1] > 1.0);
    }
    return d;
}

} // namespace

TEST_CASE("tfidf weights follow the smoothed formula and cosine is bounded") {
    const std::vector<TokenStream> docs{{"a", "b", "b"}, {"b", "c"}, {"c", "c", "d"}};
    const auto model = TfidfModel::fit(docs);
    CHECK(model.vocabulary_size() == 4);
    CHECK(model.idf("b") == doctest::Approx(std::log(4.0 / 3.0) + 1.0));
    CHECK(model.idf("zzz") == 0.0);

    // Independent cosine from dense vectors.
    auto dense = [&](const TokenStream& t) {
        std::map<std::string, double> v;
        for (const auto& w : t) {
            if (model.idf(w) > 0) {
                v[w] += model.idf(w);
            }
        }
        return v;
    };
    const auto va = dense(docs[0]);
    const auto vb = dense(docs[1]);
    double num = 0, na = 0, nb = 0;
    for (const auto& [w, x] : va) {
        na += x * x;
        if (vb.count(w)) {
            num += x * vb.at(w);
        }
    }
    for (const auto& [w, x] : vb) {
        nb += x * x;
    }
    CHECK(model.similarity(docs[0], docs[1]) == doctest::Approx(num / std::sqrt(na * nb)));
    CHECK(model.similarity(docs[0], docs[0]) == doctest::Approx(1.0));
    CHECK(model.similarity(docs[0], {"zzz"}) == 0.0);
    CHECK(model.similarity({}, docs[0]) == 0.0);
}

TEST_CASE("features reflect authorship, the closure buffer and stay finite") {
    corpus::IssueRecord issue;
    issue.project_id = "p";
    issue.issue_key = "P-1";
    issue.title = "cache eviction crash";
    issue.reporter = "Alice";
    issue.assignee = "bob";
    issue.created_at = ts("2023-01-01T00:00:00Z");
    issue.closed_at = ts("2023-02-01T00:00:00Z");

    corpus::CommitRecord near;
    near.project_id = "p";
    near.hash = "aaaa";
    near.author = "Bob";
    near.message = "Fix cache eviction crash";
    near.committed_at = ts("2023-01-25T00:00:00Z");
    near.file_changes = {{"src/Cache.java", corpus::ChangeType::modified, {"evict", "put"}}};
    corpus::CommitRecord far = near;
    far.hash = "bbbb";
    far.author = "alice";
    far.message = "unrelated refactor";
    far.committed_at = ts("2023-06-01T00:00:00Z");
    far.file_changes.clear();

    const corpus::IssueKeyPattern pattern(corpus::KeyStyle::jira, {"P"});
    corpus::CommitRecord other = far;
    other.hash = "cccc";
    other.message = "update release notes";
    const auto a = make_candidate_info(near, pattern);
    const auto b = make_candidate_info(far, pattern);
    const auto c = make_candidate_info(other, pattern);
    const std::vector<const CandidateInfo*> pool{&a, &b, &c};
    const FeatureContext context(issue, retrieval::tokenize("cache eviction crash"), pool, list_of({"aaaa", "bbbb"}));
    const auto fa = context.extract(a);
    const auto fb = context.extract(b);
    CHECK(fa[author_is_assignee] == 1.0);
    CHECK(fa[author_is_reporter] == 0.0);
    CHECK(fb[author_is_reporter] == 1.0);
    CHECK(fa[within_closure_buffer] == 1.0);
    CHECK(fb[within_closure_buffer] == 0.0);
    CHECK(fa[days_since_creation] == doctest::Approx(24.0));
    CHECK(fa[days_to_closure] == doctest::Approx(7.0));
    CHECK(fa[changed_files] == 1.0);
    CHECK(fa[changed_methods] == 2.0);
    CHECK(fa[tfidf_cosine_message] > fb[tfidf_cosine_message]);
    CHECK(fa[bm25_score] > fb[bm25_score]);
    CHECK(context.frlink_score(a) > context.frlink_score(b));
    for (const auto& f : {fa, fb}) {
        for (const double x : f) {
            CHECK(std::isfinite(x));
        }
    }
    CHECK(feature_names().size() == kFeatureCount);
}

TEST_CASE("forest learns a separable rule, is seeded and round-trips") {
    const auto train = separable(400, 1);
    const auto test = separable(200, 2);
    ForestParams params;
    params.n_trees = 30;
    params.seed = 5;
    TrainReport report;
    const auto model = ForestModel::train(train, params, 1, &report);
    CHECK(report.examples == 400);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const double s = model.score(test.row(i));
        REQUIRE(s >= 0.0);
        REQUIRE(s <= 1.0);
        correct += (s > 0.5) == (test.labels[i] == 1);
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(test.size()) > 0.9);

    const auto again = ForestModel::train(train, params, 1);
    CHECK(again.trees() == model.trees());
    params.seed = 6;
    CHECK(ForestModel::train(train, params, 1).trees() != model.trees());

    const auto restored = ForestModel::from_json(model.to_json(), 1);
    CHECK(restored.trees() == model.trees());
    CHECK(restored.params() == model.params());
    CHECK_THROWS_AS(ForestModel::from_json(model.to_json(), 2), DataError);
    auto broken = model.to_json();
    broken["trees"][0][0]["left"] = 100000;
    CHECK_THROWS_AS(ForestModel::from_json(broken, 1), DataError);
    CHECK_THROWS_AS(model.score(std::vector<double>{0.1, 0.2, 0.3}), DataError);

    Dataset single;
    single.n_features = 2;
    single.add(std::vector<double>{0.1, 0.2}, true);
    single.add(std::vector<double>{0.3, 0.4}, true);
    CHECK_THROWS_AS(ForestModel::train(single, params, 1), DataError);
    CHECK_THROWS_AS(ForestModel::train(Dataset{2, {}, {}}, params, 1), DataError);
}

TEST_CASE("frlink threshold keeps ninety percent of positives") {
    std::vector<double> scores;
    for (int i = 1; i <= 20; ++i) {
        scores.push_back(i / 20.0);
    }
    const double t = frlink_threshold(scores);
    CHECK(t == doctest::Approx(0.15));
    const auto kept = std::count_if(scores.begin(), scores.end(), [&](double s) { return s >= t; });
    CHECK(kept == 18);
    CHECK_THROWS_AS(frlink_threshold(std::span(scores).first(9)), DataError);

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xs(std::uniform_int_distribution<std::size_t>(10, 60)(rng));
        for (auto& x : xs) {
            x = std::uniform_real_distribution<double>(0, 1)(rng);
        }
        const double th = frlink_threshold(xs);
        const auto above = std::count_if(xs.begin(), xs.end(), [&](double s) { return s >= th; });
        REQUIRE(static_cast<double>(above) >= 0.9 * static_cast<double>(xs.size()) - 1e-9);
        REQUIRE(std::count(xs.begin(), xs.end(), th) >= 1);
    }
    FrlinkModel none;
    CHECK(none.is_link(0.0));
    FrlinkModel model{0.3, 12};
    CHECK_FALSE(model.is_link(0.2));
    nlohmann::json j = model;
    CHECK(j.get<FrlinkModel>().threshold == model.threshold);
}

TEST_CASE("training set takes positives then the first hard negatives") {
    const std::map<std::string, std::set<std::string>> links{{"q1", {"c", "a"}}, {"q2", {"z"}}};
    const std::map<std::string, RankedList> lists{{"q1", list_of({"x", "a", "y", "w", "c", "v"}, "q1")}};
    const std::vector<std::string> train{"q1", "q2"};
    const auto pairs = make_training_set(train, links, lists, 3);
    REQUIRE(pairs.size() == 6);
    CHECK(pairs[0] == TrainingPair{"q1", "a", true, 2});
    CHECK(pairs[1] == TrainingPair{"q1", "c", true, 5});
    CHECK(pairs[2] == TrainingPair{"q1", "x", false, 1});
    CHECK(pairs[3].doc_id == "y");
    CHECK(pairs[4].doc_id == "w");
    CHECK(pairs[5] == TrainingPair{"q2", "z", true, std::nullopt});
}

TEST_CASE("rerank_with_model reorders, keeps ids and handles failures") {
    const auto candidates = list_of({"a", "b", "c", "d"});
    const auto same = rerank_with_model(identity_scorer(), candidates, 20, "id");
    CHECK(ids_in_order(same.list) == ids_in_order(candidates));
    CHECK(same.list.provenance == "id");

    const std::map<std::string, double> scores{{"a", 0.1}, {"b", 0.9}, {"c", 0.9}, {"d", 0.5}};
    const auto by_score = rerank_with_model(
        per_pair_scorer([&](const retrieval::ScoredDoc& c) {
            if (c.doc_id == "d") {
                throw RemoteError("boom");
            }
            return scores.at(c.doc_id);
        }),
        candidates);
    CHECK(ids_in_order(by_score.list) == std::vector<std::string>{"b", "c", "a", "d"});
    CHECK(by_score.failed_pairs == 1);
    CHECK(by_score.list.entries.back().score == kFailedScore);

    const auto failed = rerank_with_model([](const RankedList&) -> std::vector<std::optional<double>> {
        throw RemoteError("down");
    }, candidates);
    CHECK(failed.fallback);
    CHECK(ids_in_order(failed.list) == ids_in_order(candidates));

    CHECK_THROWS_AS(rerank_with_model(identity_scorer(), candidates, 3), std::invalid_argument);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> ids;
        for (int i = 0; i < 20; ++i) {
            ids.push_back("d" + std::to_string(i));
        }
        std::shuffle(ids.begin(), ids.end(), rng);
        const auto input = list_of(ids);
        const auto out = rerank_with_model(
            per_pair_scorer([&](const retrieval::ScoredDoc&) { return std::uniform_int_distribution<int>(0, 3)(rng); }),
            input);
        auto a = ids_in_order(out.list);
        std::sort(a.begin(), a.end());
        std::sort(ids.begin(), ids.end());
        REQUIRE(a == ids);
    }
}

TEST_CASE("llm prompt rendering truncates on UTF-8 boundaries") {
    RerankRequestBatch batch{"p/I-1", "Title {commits}", "Desc", {{"c1", "short"}, {"c2", std::string(5, 'x') + "é"}}};
    const auto rendered = render_prompt(batch, 6);
    CHECK(rendered.truncated_messages == 1);
    CHECK(rendered.text.find("Title {commits}") != std::string::npos);
    CHECK(rendered.text.find("id: c1\nmessage: short") != std::string::npos);
    CHECK(rendered.text.find("message: xxxxx\n") != std::string::npos);
    CHECK(render_prompt(batch).truncated_messages == 0);
}

TEST_CASE("llm output parsing always yields a permutation") {
    const std::vector<std::string> ids{"abcdef1234", "abcdef1999", "0123456789", "fedcba0000"};
    CHECK(parse_llm_order("fedcba0000, then 0123456", ids) ==
          std::vector<std::string>{"fedcba0000", "0123456789", "abcdef1234", "abcdef1999"});
    // Ambiguous prefix and too-short prefix are ignored; repeats are dropped.
    CHECK(parse_llm_order("abcdef1 FEDCBA0000 fedcba0000 012", ids) ==
          std::vector<std::string>{"fedcba0000", "abcdef1234", "abcdef1999", "0123456789"});
    CHECK(parse_llm_order("", ids) == ids);
}

TEST_CASE("llm rerank talks to a chat endpoint and falls back on failure") {
    test_support::MockServer server("/chat", [](const httplib::Request& req) -> std::pair<int, std::string> {
        const auto body = nlohmann::json::parse(req.body);
        CHECK(body.at("messages")[0].at("role") == "user");
        return {200, R"({"choices":[{"message":{"content":"c3 c1"}}]})"};
    });
    EndpointConfig endpoint;
    endpoint.url = server.url();
    ChatClient client(endpoint, "m");
    RerankRequestBatch batch{"q", "t", "d", {{"c1", "x"}, {"c2", "y"}, {"c3", "z"}}};
    const auto result = llm_rerank(client, batch);
    CHECK_FALSE(result.fallback);
    CHECK(ids_in_order(result.list) == std::vector<std::string>{"c3", "c1", "c2"});
    CHECK(result.list.entries[0].score == 3.0);

    test_support::MockServer down("/chat", [](const httplib::Request&) -> std::pair<int, std::string> {
        return {503, "{}"};
    });
    endpoint.url = down.url();
    endpoint.max_retries = 1;
    endpoint.backoff_ms = 1;
    ChatClient failing(endpoint, "m");
    const auto fallback = llm_rerank(failing, batch);
    CHECK(fallback.fallback);
    CHECK(ids_in_order(fallback.list) == std::vector<std::string>{"c1", "c2", "c3"});
    CHECK(down.requests == 2);
}

TEST_CASE("pairwise client sends pairs and validates the response") {
    test_support::MockServer server("/score", [](const httplib::Request& req) -> std::pair<int, std::string> {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json scores = nlohmann::json::array();
        for (const auto& p : body.at("pairs")) {
            scores.push_back(static_cast<double>(p[1].get<std::string>().size()));
        }
        return {200, nlohmann::json{{"scores", scores}}.dump()};
    });
    EndpointConfig endpoint;
    endpoint.url = server.url();
    PairwiseClient client(endpoint);
    const std::vector<TextPair> pairs{{"q", "ab"}, {"q", "abcd"}};
    CHECK(client.score(pairs) == std::vector<double>{2.0, 4.0});
    CHECK(external_score(client, "q", "abc") == 3.0);

    test_support::MockServer bad("/score", [](const httplib::Request&) -> std::pair<int, std::string> {
        return {200, R"({"scores":[1.0]})"};
    });
    endpoint.url = bad.url();
    endpoint.max_retries = 0;
    PairwiseClient short_client(endpoint);
    CHECK_THROWS_AS(short_client.score(pairs), RemoteError);
}
