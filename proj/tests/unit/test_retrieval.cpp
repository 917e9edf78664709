#include "doctest.h"
#include "mock_server.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

#include "commitlink/common/errors.hpp"
#include "commitlink/corpus/documents.hpp"
#include "commitlink/corpus/ingest.hpp"
#include "commitlink/retrieval/embedding.hpp"
#include "commitlink/retrieval/fusion.hpp"
#include "commitlink/retrieval/retriever.hpp"
#include "commitlink/retrieval/sparse_index.hpp"
#include "commitlink/retrieval/tokenizer.hpp"
#include "commitlink/retrieval/vector_index.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

using namespace commitlink;
using namespace commitlink::retrieval;

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

std::filesystem::path fixture_dir() { return std::filesystem::path(COMMITLINK_FIXTURE_DIR); }

} // namespace

TEST_CASE("tokenizer splits camelCase and drops stopwords and short tokens") {
    CHECK(tokenize("parseFile") == TokenStream{"parse", "file"});
    CHECK(tokenize("HTTPServer") == TokenStream{"http", "server"});
    CHECK(tokenize("utf8Reader") == TokenStream{"utf8", "reader"});
    CHECK(tokenize("the a of x NullPointerException!") == TokenStream{"null", "pointer", "exception"});
    CHECK(tokenize("naïve café") == TokenStream{"naïve", "café"});
    CHECK(tokenize("").empty());
    CHECK(is_stopword("the"));
    CHECK_FALSE(is_stopword("parser"));
}

TEST_CASE("bm25 equals the direct formula, including negative-idf flooring") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
        std::vector<TokenStream> corpus(n);
        std::vector<std::string> ids;
        for (std::size_t d = 0; d < n; ++d) {
            const auto len = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
            for (std::size_t t = 0; t < len; ++t) {
                corpus[d].push_back("t" + std::to_string(std::uniform_int_distribution<int>(0, 5)(rng)));
            }
            ids.push_back("d" + std::to_string(d));
        }
        const TokenStream query{"t0", "t1", "t1", "t9"};
        const auto index = SparseIndex::build(ids, corpus, SparseVariant::bm25);
        const auto want = test_support::oracle_bm25(corpus, query);
        const auto got = index.scores(query);
        for (std::size_t d = 0; d < n; ++d) {
            REQUIRE(got[d] == doctest::Approx(want[d]).epsilon(1e-12));
            REQUIRE(index.score(query, d) == doctest::Approx(want[d]).epsilon(1e-12));
        }
    }
}

TEST_CASE("bm25l follows its formula and credits delta to every document") {
    const std::vector<TokenStream> corpus{{"a", "b"}, {"b", "c", "c"}, {"d"}};
    const auto index = SparseIndex::build({"x", "y", "z"}, corpus, SparseVariant::bm25l);
    const double avgdl = 2.0;
    auto expected = [&](const TokenStream& doc, const std::string& term, double df) {
        const double idf = std::log(3.0 + 1.0) - std::log(df + 0.5);
        double tf = 0;
        for (const auto& t : doc) {
            tf += t == term;
        }
        const double ctd = tf / (1 - 0.75 + 0.75 * static_cast<double>(doc.size()) / avgdl);
        return idf * (1.5 + 1) * (ctd + 0.5) / (1.5 + ctd + 0.5);
    };
    const auto scores = index.scores({"c"});
    CHECK(scores[1] == doctest::Approx(expected(corpus[1], "c", 1)));
    CHECK(scores[2] == doctest::Approx(expected(corpus[2], "c", 1)));
    CHECK(scores[2] > 0.0);
}

TEST_CASE("sparse index search orders, pads and round-trips") {
    const std::vector<TokenStream> corpus{{"cache", "evict"}, {"retry", "http"}, {"cache", "cache", "leak"}};
    const auto index = SparseIndex::build({"a", "b", "c"}, corpus, SparseVariant::bm25);
    const auto hits = index.search({"cache"}, 3, "q1");
    CHECK(hits.query_id == "q1");
    REQUIRE(hits.size() == 3);
    CHECK(hits.entries[2].doc_id == "b");
    CHECK(hits.entries[2].score == 0.0);
    const std::vector<std::size_t> subset{1, 2};
    CHECK(ids_in_order(index.search_subset({"cache"}, 5, subset)) == std::vector<std::string>{"c", "b"});
    CHECK(index.score_external({"cache"}, {"cache"}) > 0.0);
    std::stringstream buf;
    index.save(buf);
    CHECK(SparseIndex::load(buf) == index);
    CHECK_THROWS_AS(SparseIndex::build(std::vector<std::string>{}, std::vector<TokenStream>{}, SparseVariant::bm25),
                    DataError);
}

TEST_CASE("rrf fuses by reciprocal rank and ignores list order") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<RankedList> lists;
        for (int l = 0; l < 3; ++l) {
            std::vector<std::string> ids;
            for (int d = 0; d < 30; ++d) {
                ids.push_back("d" + std::to_string(d));
            }
            std::shuffle(ids.begin(), ids.end(), rng);
            ids.resize(std::uniform_int_distribution<std::size_t>(0, 30)(rng));
            lists.push_back(list_of(ids));
        }
        const auto fused = rrf_fuse(lists, 60, 100);
        auto reversed = lists;
        std::reverse(reversed.begin(), reversed.end());
        REQUIRE(rrf_fuse(reversed, 60, 100) == fused);
        const auto oracle = test_support::oracle_rrf(lists);
        REQUIRE(fused.size() == oracle.size());
        for (const auto& e : fused.entries) {
            REQUIRE(e.score == doctest::Approx(oracle.at(e.doc_id)).epsilon(1e-15));
        }
        REQUIRE(std::is_sorted(fused.entries.begin(), fused.entries.end(), ranks_before));
        REQUIRE(rrf_fuse(lists).size() <= 50);
    }
    const auto dup = rrf_fuse(std::vector<RankedList>{list_of({"a", "a", "b"})}, 60, 10);
    CHECK(dup.entries[0].score == 1.0 / 61.0);
    CHECK(dup.entries[1].score == 1.0 / 63.0);
    CHECK_THROWS_AS(rrf_fuse(std::vector<RankedList>{}), std::invalid_argument);
}

TEST_CASE("ranked lists serialise and answer rank queries") {
    auto l = list_of({"a", "b", "c"}, "p/I-1");
    CHECK(l.rank_of("b") == 2);
    CHECK_FALSE(l.rank_of("z"));
    CHECK(l.top(2).size() == 2);
    nlohmann::json j = l;
    CHECK(j.get<RankedList>() == l);
}

TEST_CASE("hashing embedder is deterministic and unit-norm") {
    HashingEmbedder e(64, 3);
    const std::vector<std::string> texts{"cache eviction bug", "cache eviction bug", "", "the of"};
    const auto v = e.embed(texts);
    CHECK(v[0] == v[1]);
    for (const auto& x : v) {
        CHECK(dot(x, x) == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(dot(v[0], e.embed_one("eviction cache")) > dot(v[0], e.embed_one("retry http client")));
    CHECK(HashingEmbedder(64, 4).embed_one("cache") != e.embed_one("cache"));
}

TEST_CASE("http embedder checks dimensions and normalises") {
    test_support::MockServer server("/embed", [](const httplib::Request& req) -> std::pair<int, std::string> {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json vectors = nlohmann::json::array();
        for (std::size_t i = 0; i < body.at("texts").size(); ++i) {
            vectors.push_back({3.0, 4.0});
        }
        return {200, nlohmann::json{{"vectors", vectors}}.dump()};
    });
    EndpointConfig config;
    config.url = server.url();
    HttpEmbedder good(config, 2, 2);
    const std::vector<std::string> texts{"a", "b", "c"};
    const auto v = good.embed(texts);
    REQUIRE(v.size() == 3);
    CHECK(v[2][0] == doctest::Approx(0.6));
    CHECK(server.requests == 2);
    config.max_retries = 0;
    HttpEmbedder wrong_dim(config, 3);
    CHECK_THROWS_AS(wrong_dim.embed(texts), RemoteError);
}

TEST_CASE("vector indexes: exact small cases, persistence and query checks") {
    const auto data = test_support::clustered_vectors(400, 32, 4, 4, 1.0, 5);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < data.size(); ++i) {
        ids.push_back("v" + std::to_string(i));
    }
    const auto flat = build_vector_index(ids, data, VectorIndexKind::flat);
    for (const auto kind : {VectorIndexKind::flat, VectorIndexKind::hnsw, VectorIndexKind::lsh,
                            VectorIndexKind::rp_forest}) {
        CAPTURE(to_string(kind));
        const auto index = build_vector_index(ids, data, kind);
        const auto again = build_vector_index(ids, data, kind);
        const auto& q = data[17];
        const auto top = index->search(q, 10);
        REQUIRE(top.size() == 10);
        CHECK(top.entries[0].doc_id == "v17");
        CHECK(std::is_sorted(top.entries.begin(), top.entries.end(), ranks_before));
        CHECK(again->search(q, 10) == top);
        CHECK(index->search(q, 1000).size() == data.size());
        std::stringstream buf;
        index->save(buf);
        const auto loaded = load_vector_index(buf);
        CHECK(loaded->kind() == kind);
        CHECK(loaded->search(q, 10) == top);
        CHECK_THROWS_AS(index->search(Vector(5, 0.1f), 3), DataError);
    }
    std::vector<Vector> bad{{1.0f, 0.0f}, {3.0f, 4.0f}};
    CHECK_THROWS_AS(VectorStore({"a", "b"}, bad), DataError);
    std::stringstream junk("not an index");
    CHECK_THROWS(load_vector_index(junk));
}

TEST_CASE("retrieve_for_issue covers every kind and rejects missing prerequisites") {
    std::vector<corpus::Document> docs;
    for (int i = 0; i < 30; ++i) {
        docs.push_back({"h" + std::to_string(i), "commit about topic" + std::to_string(i % 7) + " and code", 4});
    }
    docs.push_back({"target", "cache eviction null pointer fix", 5});
    const DocumentStore store(docs);
    HashingEmbedder embedder(64, 1);
    const auto embeddings = embed_documents(embedder, docs);
    const auto global = build_global_sparse_index(store, RetrieverKind::bm25, {});
    RetrievalContext context{&store, &embeddings, &global, nullptr};
    IssueQuery query{"p/I-1", tokenize("null pointer in cache eviction"), embedder.embed_one("null pointer in cache eviction")};
    std::vector<std::string> pool;
    for (const auto& d : docs) {
        pool.push_back(d.doc_id);
    }
    for (const auto kind : {RetrieverKind::bm25, RetrieverKind::bm25l, RetrieverKind::flat, RetrieverKind::hnsw,
                            RetrieverKind::lsh, RetrieverKind::rp_forest, RetrieverKind::rrf}) {
        RetrieverConfig config;
        config.name = std::string(to_string(kind));
        config.kind = kind;
        config.k = 10;
        const auto list = retrieve_for_issue(query, pool, config, context);
        CAPTURE(config.name);
        CHECK(list.provenance == config.name);
        if (kind == RetrieverKind::rrf) {
            // Component lists are k deep; the fused list holds their union.
            CHECK(list.size() >= 10);
            CHECK(list.size() <= 20);
        } else {
            CHECK(list.size() == 10);
        }
        CHECK(list.entries[0].doc_id == "target");
    }
    RetrieverConfig global_bm25;
    global_bm25.name = "g";
    global_bm25.scope = SparseScope::global;
    const std::vector<std::string> subset{"h1", "target"};
    CHECK(ids_in_order(retrieve_for_issue(query, subset, global_bm25, context)) ==
          std::vector<std::string>{"target", "h1"});
    CHECK(retrieve_for_issue(query, std::vector<std::string>{}, global_bm25, context).empty());

    RetrieverConfig flat;
    flat.name = "flat";
    flat.kind = RetrieverKind::flat;
    RetrievalContext no_vectors{&store, nullptr, nullptr, nullptr};
    CHECK_THROWS_AS(retrieve_for_issue(query, pool, flat, no_vectors), PrerequisiteError);
    CHECK_THROWS_AS(retrieve_for_issue(query, pool, global_bm25, no_vectors), PrerequisiteError);
    CHECK_THROWS_AS(DocumentStore(std::vector<corpus::Document>{docs[0], docs[0]}), DataError);
}

TEST_CASE("fixture issue whose commit repeats the title ranks it in the bm25 top-5") {
    const auto issues = corpus::ingest_issues(fixture_dir() / "issues.jsonl").records;
    const auto commits = corpus::filter_commits(corpus::ingest_commits(fixture_dir() / "commits.jsonl").records);
    const corpus::IssueKeyPattern pattern(corpus::KeyStyle::jira, {"FIX"});
    std::vector<corpus::Document> docs;
    std::vector<std::string> pool;
    for (const auto& c : commits) {
        docs.push_back(corpus::commit_document(c, pattern));
        pool.push_back(c.hash);
    }
    const DocumentStore store(docs);
    const auto& issue = issues[0];  // FIX-1, whose fix commit copies its title
    IssueQuery query{"fixture/FIX-1", tokenize(corpus::issue_query(issue, pattern)), {}};
    RetrieverConfig bm25;
    bm25.name = "bm25";
    const auto list = retrieve_for_issue(query, pool, bm25, RetrievalContext{&store, nullptr, nullptr, nullptr});
    const auto target = std::find_if(commits.begin(), commits.end(), [](const auto& c) {
        return c.message.rfind("FIX-1 Fix NullPointerException", 0) == 0;
    });
    REQUIRE(target != commits.end());
    const auto rank = list.rank_of(target->hash);
    REQUIRE(rank);
    CHECK(*rank <= 5);
}
