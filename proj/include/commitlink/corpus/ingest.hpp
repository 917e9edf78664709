#pragma once

#include "commitlink/corpus/records.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace commitlink::corpus {

struct IngestWarning {
    std::size_t line = 0;  ///< 1-based
    std::string message;
};

template <class Record>
struct IngestResult {
    std::vector<Record> records;
    std::size_t skipped = 0;
    std::vector<IngestWarning> warnings;
    /// Issues only: records kept whose closed_at precedes created_at.
    std::size_t inverted_closure = 0;
};

/// Reads a line-delimited issues file. Throws IoError when the file cannot be
/// opened; malformed lines, lines missing issue_key/created_at and duplicate
/// keys are skipped with a warning carrying the line number.
IngestResult<IssueRecord> ingest_issues(const std::filesystem::path& path);
IngestResult<IssueRecord> ingest_issues(std::istream& in);

/// Same contract for commits; hash (hex, >= 7 chars) and committed_at are required.
IngestResult<CommitRecord> ingest_commits(const std::filesystem::path& path);
IngestResult<CommitRecord> ingest_commits(std::istream& in);

/// Canonical writers; their output re-ingests to equal records.
void write_issues(std::ostream& out, std::span<const IssueRecord> issues);
void write_commits(std::ostream& out, std::span<const CommitRecord> commits);

} // namespace commitlink::corpus
