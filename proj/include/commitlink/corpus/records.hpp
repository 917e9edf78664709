#pragma once

#include "commitlink/common/time.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace commitlink::corpus {

enum class ChangeType { added, removed, modified };

std::string_view to_string(ChangeType type);
std::optional<ChangeType> parse_change_type(std::string_view text);

struct FileChange {
    std::string path;
    ChangeType change_type = ChangeType::modified;
    std::vector<std::string> methods;

    bool operator==(const FileChange&) const = default;
};

struct IssueRecord {
    std::string project_id;
    std::string issue_key;
    std::string title;
    std::string description;
    std::string reporter;
    std::optional<std::string> assignee;
    Timestamp created_at{};
    std::optional<Timestamp> closed_at;
    std::string status;

    /// closed_at when it is not earlier than created_at. Records with an
    /// inverted closure keep their raw value but never use it for windows.
    std::optional<Timestamp> usable_closed_at() const {
        if (closed_at && *closed_at >= created_at) {
            return closed_at;
        }
        return std::nullopt;
    }

    bool operator==(const IssueRecord&) const = default;
};

struct CommitRecord {
    std::string project_id;
    std::string hash;
    std::string author;
    Timestamp committed_at{};  ///< committer timestamp
    std::string message;
    std::vector<std::string> parents;
    std::vector<FileChange> file_changes;

    bool operator==(const CommitRecord&) const = default;
};

enum class LinkSource { explicit_key };

/// Ground-truth link mined from an explicit issue key in a commit message.
struct TrueLink {
    std::string project_id;
    std::string issue_key;
    std::string commit_hash;
    LinkSource source = LinkSource::explicit_key;

    auto operator<=>(const TrueLink&) const = default;
};

/// Retrieval document built from one commit.
struct Document {
    std::string doc_id;  ///< commit hash
    std::string text;
    std::size_t token_count = 0;

    bool operator==(const Document&) const = default;
};

/// How a project's issue tracker spells issue references.
enum class KeyStyle { jira, github };

std::string_view to_string(KeyStyle style);
std::optional<KeyStyle> parse_key_style(std::string_view text);

/// Stable query identifier "<project_id>/<issue_key>".
std::string query_id(const IssueRecord& issue);
std::string query_id(std::string_view project_id, std::string_view issue_key);

void to_json(nlohmann::json& j, const FileChange& change);
void to_json(nlohmann::json& j, const IssueRecord& issue);
void to_json(nlohmann::json& j, const CommitRecord& commit);
void to_json(nlohmann::json& j, const TrueLink& link);
void to_json(nlohmann::json& j, const Document& doc);
void from_json(const nlohmann::json& j, TrueLink& link);
void from_json(const nlohmann::json& j, Document& doc);

} // namespace commitlink::corpus
