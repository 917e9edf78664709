#include "commitlink/corpus/ingest.hpp"

#include "commitlink/common/errors.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <fstream>
#include <set>
#include <utility>

namespace commitlink::corpus {
namespace {

using nlohmann::json;

// Thrown for a single bad line; never escapes this file.
struct LineError {
    std::string message;
};

std::string opt_string(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return {};
    }
    if (!it->is_string()) {
        throw LineError{std::string("field '") + key + "' must be a string"};
    }
    return it->get<std::string>();
}

std::optional<Timestamp> opt_time(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_string()) {
        throw LineError{std::string("field '") + key + "' must be an ISO-8601 string"};
    }
    auto t = parse_timestamp(it->get<std::string>());
    if (!t) {
        throw LineError{std::string("field '") + key + "' is not a valid timestamp"};
    }
    return t;
}

std::vector<std::string> string_list(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return {};
    }
    if (!it->is_array()) {
        throw LineError{std::string("field '") + key + "' must be an array"};
    }
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) {
            throw LineError{std::string("field '") + key + "' must contain strings"};
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

bool is_hex_hash(const std::string& s) {
    if (s.size() < 7) {
        return false;
    }
    for (const char c : s) {
        if (!std::isxdigit(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

IssueRecord parse_issue(const json& obj) {
    IssueRecord issue;
    issue.project_id = opt_string(obj, "project_id");
    issue.issue_key = opt_string(obj, "issue_key");
    if (issue.issue_key.empty()) {
        throw LineError{"missing issue_key"};
    }
    auto created = opt_time(obj, "created_at");
    if (!created) {
        throw LineError{"missing created_at"};
    }
    issue.created_at = *created;
    issue.closed_at = opt_time(obj, "closed_at");
    issue.title = opt_string(obj, "title");
    issue.description = opt_string(obj, "description");
    issue.reporter = opt_string(obj, "reporter");
    if (auto it = obj.find("assignee"); it != obj.end() && !it->is_null()) {
        issue.assignee = opt_string(obj, "assignee");
    }
    issue.status = opt_string(obj, "status");
    return issue;
}

CommitRecord parse_commit(const json& obj) {
    CommitRecord commit;
    commit.project_id = opt_string(obj, "project_id");
    commit.hash = opt_string(obj, "hash");
    if (commit.hash.empty()) {
        throw LineError{"missing hash"};
    }
    if (!is_hex_hash(commit.hash)) {
        throw LineError{"hash must be at least 7 hex characters"};
    }
    auto committed = opt_time(obj, "committed_at");
    if (!committed) {
        throw LineError{"missing committed_at"};
    }
    commit.committed_at = *committed;
    commit.author = opt_string(obj, "author");
    commit.message = opt_string(obj, "message");
    commit.parents = string_list(obj, "parents");
    // "diff" and any other extra fields are accepted and ignored.
    if (auto it = obj.find("file_changes"); it != obj.end() && !it->is_null()) {
        if (!it->is_array()) {
            throw LineError{"field 'file_changes' must be an array"};
        }
        for (const auto& fc : *it) {
            if (!fc.is_object()) {
                throw LineError{"file_changes entries must be objects"};
            }
            FileChange change;
            change.path = opt_string(fc, "path");
            if (change.path.empty()) {
                throw LineError{"file change with empty path"};
            }
            const auto type = parse_change_type(opt_string(fc, "change_type"));
            if (!type) {
                throw LineError{"change_type must be one of added, removed, modified"};
            }
            change.change_type = *type;
            change.methods = string_list(fc, "methods");
            commit.file_changes.push_back(std::move(change));
        }
    }
    return commit;
}

template <class Record, class Parse, class Key>
IngestResult<Record> ingest_lines(std::istream& in, Parse parse, Key key_of, const char* what) {
    IngestResult<Record> result;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    std::size_t line_no = 0;
    auto reject = [&](std::string message) {
        ++result.skipped;
        spdlog::warn("{} line {}: {}", what, line_no, message);
        result.warnings.push_back({line_no, std::move(message)});
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        auto obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            reject("not a JSON object");
            continue;
        }
        try {
            Record record = parse(obj);
            auto key = key_of(record);
            if (!seen.insert(key).second) {
                reject("duplicate " + key.second + " in project '" + key.first + "'");
                continue;
            }
            result.records.push_back(std::move(record));
        } catch (const LineError& e) {
            reject(e.message);
        }
    }
    return result;
}

} // namespace

IngestResult<IssueRecord> ingest_issues(std::istream& in) {
    auto result = ingest_lines<IssueRecord>(
        in, parse_issue, [](const IssueRecord& r) { return std::pair{r.project_id, r.issue_key}; }, "issues");
    for (const auto& issue : result.records) {
        if (issue.closed_at && *issue.closed_at < issue.created_at) {
            ++result.inverted_closure;
        }
    }
    return result;
}

IngestResult<IssueRecord> ingest_issues(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open issues file " + path.string());
    }
    return ingest_issues(in);
}

IngestResult<CommitRecord> ingest_commits(std::istream& in) {
    return ingest_lines<CommitRecord>(
        in, parse_commit, [](const CommitRecord& r) { return std::pair{r.project_id, r.hash}; }, "commits");
}

IngestResult<CommitRecord> ingest_commits(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open commits file " + path.string());
    }
    return ingest_commits(in);
}

void write_issues(std::ostream& out, std::span<const IssueRecord> issues) {
    for (const auto& issue : issues) {
        out << json(issue).dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
}

void write_commits(std::ostream& out, std::span<const CommitRecord> commits) {
    for (const auto& commit : commits) {
        out << json(commit).dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
}

} // namespace commitlink::corpus
