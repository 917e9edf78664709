#include "commitlink/corpus/issue_keys.hpp"

#include "commitlink/common/errors.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace commitlink::corpus {
namespace {

bool is_word(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_';
}

bool is_digit(char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

bool iequals_prefix(std::string_view text, std::size_t pos, std::string_view key) {
    if (pos + key.size() > text.size()) {
        return false;
    }
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) !=
            std::tolower(static_cast<unsigned char>(key[i]))) {
            return false;
        }
    }
    return true;
}

} // namespace

IssueKeyPattern::IssueKeyPattern(KeyStyle style, std::vector<std::string> keys)
    : style_(style), keys_(std::move(keys)) {
    std::erase_if(keys_, [](const std::string& k) { return k.empty(); });
    if (style_ == KeyStyle::jira && keys_.empty()) {
        throw ConfigError("jira-style projects need at least one issue key prefix");
    }
    std::stable_sort(keys_.begin(), keys_.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
}

std::size_t IssueKeyPattern::match_at(std::string_view text, std::size_t pos, std::string* key) const {
    if (style_ == KeyStyle::github) {
        if (text[pos] != '#' || (pos > 0 && is_word(text[pos - 1]))) {
            return 0;
        }
        std::size_t end = pos + 1;
        while (end < text.size() && is_digit(text[end])) {
            ++end;
        }
        if (end == pos + 1 || (end < text.size() && is_word(text[end]))) {
            return 0;
        }
        if (key) {
            *key = std::string(text.substr(pos, end - pos));
        }
        return end - pos;
    }

    if (pos > 0 && is_word(text[pos - 1])) {
        return 0;
    }
    for (const auto& k : keys_) {
        if (!iequals_prefix(text, pos, k)) {
            continue;
        }
        std::size_t dash = pos + k.size();
        if (dash >= text.size() || text[dash] != '-') {
            continue;
        }
        std::size_t end = dash + 1;
        while (end < text.size() && is_digit(text[end])) {
            ++end;
        }
        if (end == dash + 1 || (end < text.size() && is_word(text[end]))) {
            continue;
        }
        if (key) {
            *key = k + std::string(text.substr(dash, end - dash));
        }
        return end - pos;
    }
    return 0;
}

std::vector<IssueKeyPattern::Match> IssueKeyPattern::find_all(std::string_view text) const {
    std::vector<Match> matches;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::string key;
        if (const auto len = match_at(text, pos, &key); len > 0) {
            matches.push_back({pos, pos + len, std::move(key)});
            pos += len;
        } else {
            ++pos;
        }
    }
    return matches;
}

std::string IssueKeyPattern::scrub(std::string_view text) const {
    std::string current(text);
    for (;;) {
        const auto matches = find_all(current);
        if (matches.empty()) {
            return current;
        }
        std::string next;
        next.reserve(current.size());
        std::size_t cursor = 0;
        for (const auto& m : matches) {
            next.append(current, cursor, m.begin - cursor);
            cursor = m.end;
        }
        next.append(current, cursor, std::string::npos);
        current = std::move(next);
    }
}

std::string scrub_identifiers(std::string_view text, const IssueKeyPattern& pattern) {
    return pattern.scrub(text);
}

std::string scrub_identifiers(std::string_view text, const std::vector<std::string>& project_keys, KeyStyle style) {
    return IssueKeyPattern(style, project_keys).scrub(text);
}

std::vector<TrueLink> extract_true_links(std::span<const CommitRecord> commits, const IssueKeyPattern& pattern) {
    std::vector<TrueLink> links;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& commit : commits) {
        for (auto& m : pattern.find_all(commit.message)) {
            if (seen.emplace(m.key, commit.hash).second) {
                links.push_back({commit.project_id, std::move(m.key), commit.hash, LinkSource::explicit_key});
            }
        }
    }
    return links;
}

} // namespace commitlink::corpus
