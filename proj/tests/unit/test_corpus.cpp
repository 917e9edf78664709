#include "doctest.h"

#include "commitlink/common/errors.hpp"
#include "commitlink/corpus/documents.hpp"
#include "commitlink/corpus/ingest.hpp"
#include "commitlink/corpus/issue_keys.hpp"

#include <sstream>

using namespace commitlink;
using namespace commitlink::corpus;

namespace {

CommitRecord commit(std::string hash, std::string message, std::size_t parents = 1, std::size_t files = 1) {
    CommitRecord c;
    c.project_id = "p";
    c.hash = std::move(hash);
    c.message = std::move(message);
    c.committed_at = *parse_timestamp("2023-01-01T00:00:00Z");
    for (std::size_t i = 0; i < parents; ++i) {
        c.parents.push_back("aaaaaaa" + std::to_string(i));
    }
    for (std::size_t i = 0; i < files; ++i) {
        c.file_changes.push_back({"src/Foo" + std::to_string(i) + ".java", ChangeType::modified, {"parseFile"}});
    }
    return c;
}

} // namespace

TEST_CASE("jira keys match on word boundaries, case-insensitively") {
    const IssueKeyPattern p(KeyStyle::jira, {"KAFKA", "ZK"});
    const auto m = p.find_all("KAFKA-12 and kafka-3, not MYKAFKA-1 or KAFKA-x; ZK-7.");
    REQUIRE(m.size() == 3);
    CHECK(m[0].key == "KAFKA-12");
    CHECK(m[1].key == "KAFKA-3");
    CHECK(m[2].key == "ZK-7");
    CHECK(p.scrub("[KAFKA-12] fix leak") == "[] fix leak");
    CHECK_THROWS_AS(IssueKeyPattern(KeyStyle::jira, {}), ConfigError);
}

TEST_CASE("github keys skip cross-repository references") {
    const IssueKeyPattern p(KeyStyle::github, {});
    const auto m = p.find_all("Fixes #12, see owner/repo#5 and (#7)");
    REQUIRE(m.size() == 2);
    CHECK(m[0].key == "#12");
    CHECK(m[1].key == "#7");
}

TEST_CASE("scrubbing removes every key, including ones formed by removal") {
    const IssueKeyPattern p(KeyStyle::jira, {"AB"});
    const auto scrubbed = p.scrub("AB-AB-1-2 done");
    CHECK(p.find_all(scrubbed).empty());
    CHECK(scrub_identifiers("see AB-9", {"AB"}, KeyStyle::jira) == "see ");
}

TEST_CASE("true links are one per distinct key and commit") {
    const IssueKeyPattern p(KeyStyle::jira, {"AB"});
    const std::vector<CommitRecord> commits{commit("1111111", "AB-1 AB-2 ab-1"), commit("2222222", "no key")};
    const auto links = extract_true_links(commits, p);
    REQUIRE(links.size() == 2);
    CHECK(links[0].issue_key == "AB-1");
    CHECK(links[1].issue_key == "AB-2");
    CHECK(links[0].commit_hash == "1111111");
}

TEST_CASE("filter drops merges and commits without file changes") {
    const std::vector<CommitRecord> commits{commit("1111111", "a"), commit("2222222", "merge", 2),
                                            commit("3333333", "empty", 1, 0), commit("4444444", "root", 0)};
    const auto kept = filter_commits(commits);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].hash == "1111111");
    CHECK(kept[1].hash == "4444444");
}

TEST_CASE("documents hold the scrubbed message and code terms") {
    const IssueKeyPattern p(KeyStyle::jira, {"AB"});
    auto c = commit("1111111", "AB-4 fix parser");
    c.file_changes = {{"src/AB-4/Parser.java", ChangeType::added, {"parseFile", "close"}}};
    CHECK(code_terms(c) == "added src/AB-4/Parser.java parseFile close");
    const auto doc = commit_document(c, p);
    CHECK(doc.doc_id == "1111111");
    CHECK(doc.text.find("AB-4") == std::string::npos);
    CHECK(doc.text.find("fix parser") != std::string::npos);
    CHECK(doc.token_count > 0);

    IssueRecord issue;
    issue.title = "AB-4: Parser";
    issue.description = "crash in AB-4";
    CHECK(issue_query(issue, p).find("AB-4") == std::string::npos);
}

TEST_CASE("ingest skips bad lines with line numbers and keeps the rest") {
    std::istringstream in(R"({"issue_key": "AB-1", "title": "t", "created_at": "2023-01-01T00:00:00Z"}
not json
{"title": "no key", "created_at": "2023-01-01T00:00:00Z"}
{"issue_key": "AB-2", "created_at": "yesterday"}
{"issue_key": "AB-1", "created_at": "2023-01-02T00:00:00Z"}

{"issue_key": "AB-3", "created_at": "2023-01-05T00:00:00Z", "closed_at": "2023-01-01T00:00:00Z", "assignee": null}
)");
    const auto result = ingest_issues(in);
    REQUIRE(result.records.size() == 2);
    CHECK(result.skipped == 4);
    CHECK(result.inverted_closure == 1);
    REQUIRE(result.warnings.size() == 4);
    CHECK(result.warnings[0].line == 2);
    CHECK(result.warnings[3].line == 5);
    CHECK_FALSE(result.records[1].usable_closed_at());
    CHECK_FALSE(result.records[1].assignee);
}

TEST_CASE("commit ingest validates hashes and round-trips through the writer") {
    std::istringstream in(R"({"hash": "abc", "committed_at": "2023-01-01T00:00:00Z"}
{"hash": "0123456789abcdef", "committed_at": "2023-01-01T00:00:00Z", "author": "a", "message": "m",
 "parents": ["fedcba9876543210"], "file_changes": [{"path": "x.c", "change_type": "removed", "methods": ["f"]}]}
)");
    const auto first = ingest_commits(in);
    REQUIRE(first.records.size() == 0);

    std::istringstream good(R"({"hash": "0123456789abcdef", "committed_at": "2023-01-01T00:00:00Z", "author": "a", "message": "m", "parents": ["fedcba9876543210"], "file_changes": [{"path": "x.c", "change_type": "removed", "methods": ["f"]}]})");
    const auto parsed = ingest_commits(good);
    REQUIRE(parsed.records.size() == 1);
    CHECK(parsed.records[0].file_changes[0].change_type == ChangeType::removed);
    std::stringstream out;
    write_commits(out, parsed.records);
    const auto again = ingest_commits(out);
    REQUIRE(again.records.size() == 1);
    CHECK(again.records[0] == parsed.records[0]);

    CHECK_THROWS_AS(ingest_issues(std::filesystem::path("/nonexistent/issues.jsonl")), IoError);
}
