#pragma once

#include "commitlink/corpus/records.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace commitlink::corpus {

/// Matcher for a project's issue references.
///
/// Jira style matches `KEY-<digits>` for any configured KEY, case-insensitive
/// on KEY, anchored at word boundaries on both sides ("MYKAFKA-1" does not
/// match KAFKA). GitHub style matches `#<digits>` preceded by a non-word
/// character (so "owner/repo#5" cross-references are left alone) and followed
/// by a word boundary.
class IssueKeyPattern {
public:
    struct Match {
        std::size_t begin = 0;
        std::size_t end = 0;    ///< one past the last matched byte
        std::string key;        ///< canonical key: configured KEY spelling, or "#<digits>"
    };

    /// Throws ConfigError for a Jira-style pattern without keys.
    IssueKeyPattern(KeyStyle style, std::vector<std::string> keys);

    /// Non-overlapping matches, left to right.
    std::vector<Match> find_all(std::string_view text) const;

    /// Text with every matched span deleted, repeated until no match remains.
    std::string scrub(std::string_view text) const;

    KeyStyle style() const { return style_; }
    const std::vector<std::string>& keys() const { return keys_; }

private:
    std::size_t match_at(std::string_view text, std::size_t pos, std::string* key) const;

    KeyStyle style_;
    std::vector<std::string> keys_;  // longest first
};

std::string scrub_identifiers(std::string_view text, const IssueKeyPattern& pattern);
std::string scrub_identifiers(std::string_view text, const std::vector<std::string>& project_keys, KeyStyle style);

/// One link per distinct (issue_key, hash) referenced in a raw commit message.
/// Output is ordered by commit, then by first mention.
std::vector<TrueLink> extract_true_links(std::span<const CommitRecord> commits, const IssueKeyPattern& pattern);

} // namespace commitlink::corpus
