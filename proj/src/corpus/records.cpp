#include "commitlink/corpus/records.hpp"

namespace commitlink::corpus {

std::string_view to_string(ChangeType type) {
    switch (type) {
    case ChangeType::added:
        return "added";
    case ChangeType::removed:
        return "removed";
    case ChangeType::modified:
        return "modified";
    }
    return "modified";
}

std::optional<ChangeType> parse_change_type(std::string_view text) {
    if (text == "added") {
        return ChangeType::added;
    }
    if (text == "removed") {
        return ChangeType::removed;
    }
    if (text == "modified") {
        return ChangeType::modified;
    }
    return std::nullopt;
}

std::string_view to_string(KeyStyle style) {
    return style == KeyStyle::jira ? "jira" : "github";
}

std::optional<KeyStyle> parse_key_style(std::string_view text) {
    if (text == "jira") {
        return KeyStyle::jira;
    }
    if (text == "github") {
        return KeyStyle::github;
    }
    return std::nullopt;
}

std::string query_id(std::string_view project_id, std::string_view issue_key) {
    std::string id;
    id.reserve(project_id.size() + issue_key.size() + 1);
    id.append(project_id).append("/").append(issue_key);
    return id;
}

std::string query_id(const IssueRecord& issue) {
    return query_id(issue.project_id, issue.issue_key);
}

void to_json(nlohmann::json& j, const FileChange& change) {
    j = nlohmann::json{{"path", change.path},
                       {"change_type", std::string(to_string(change.change_type))},
                       {"methods", change.methods}};
}

void to_json(nlohmann::json& j, const IssueRecord& issue) {
    j = nlohmann::json{{"project_id", issue.project_id},
                       {"issue_key", issue.issue_key},
                       {"title", issue.title},
                       {"description", issue.description},
                       {"reporter", issue.reporter},
                       {"assignee", issue.assignee ? nlohmann::json(*issue.assignee) : nlohmann::json()},
                       {"created_at", format_timestamp(issue.created_at)},
                       {"closed_at", issue.closed_at ? nlohmann::json(format_timestamp(*issue.closed_at))
                                                     : nlohmann::json()},
                       {"status", issue.status}};
}

void to_json(nlohmann::json& j, const CommitRecord& commit) {
    j = nlohmann::json{{"project_id", commit.project_id},
                       {"hash", commit.hash},
                       {"author", commit.author},
                       {"committed_at", format_timestamp(commit.committed_at)},
                       {"message", commit.message},
                       {"parents", commit.parents},
                       {"file_changes", commit.file_changes}};
}

void to_json(nlohmann::json& j, const TrueLink& link) {
    j = nlohmann::json{{"project_id", link.project_id},
                       {"issue_key", link.issue_key},
                       {"commit_hash", link.commit_hash},
                       {"source", "explicit_key"}};
}

void from_json(const nlohmann::json& j, TrueLink& link) {
    link.project_id = j.at("project_id").get<std::string>();
    link.issue_key = j.at("issue_key").get<std::string>();
    link.commit_hash = j.at("commit_hash").get<std::string>();
    link.source = LinkSource::explicit_key;
}

void to_json(nlohmann::json& j, const Document& doc) {
    j = nlohmann::json{{"doc_id", doc.doc_id}, {"text", doc.text}, {"token_count", doc.token_count}};
}

void from_json(const nlohmann::json& j, Document& doc) {
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.text = j.at("text").get<std::string>();
    doc.token_count = j.at("token_count").get<std::size_t>();
}

} // namespace commitlink::corpus
