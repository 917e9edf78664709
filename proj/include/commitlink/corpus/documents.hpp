#pragma once

#include "commitlink/corpus/issue_keys.hpp"
#include "commitlink/corpus/records.hpp"

#include <span>
#include <string>
#include <vector>

namespace commitlink::corpus {

/// Keeps commits with at most one parent and at least one file change, in
/// input order.
std::vector<CommitRecord> filter_commits(std::span<const CommitRecord> commits);

/// One line per file change: "<change_type> <path> <method>...".
std::string code_terms(const CommitRecord& commit);

/// Scrubbed message, a newline, then the code-term lines. The whole text is
/// scrubbed, so keys embedded in paths disappear too.
Document commit_document(const CommitRecord& commit, const IssueKeyPattern& pattern);

/// scrub(title + " " + description).
std::string issue_query(const IssueRecord& issue, const IssueKeyPattern& pattern);

} // namespace commitlink::corpus
