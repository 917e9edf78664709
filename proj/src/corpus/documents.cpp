#include "commitlink/corpus/documents.hpp"

#include "commitlink/retrieval/tokenizer.hpp"

namespace commitlink::corpus {

std::vector<CommitRecord> filter_commits(std::span<const CommitRecord> commits) {
    std::vector<CommitRecord> kept;
    kept.reserve(commits.size());
    for (const auto& c : commits) {
        if (c.parents.size() <= 1 && !c.file_changes.empty()) {
            kept.push_back(c);
        }
    }
    return kept;
}

std::string code_terms(const CommitRecord& commit) {
    std::string out;
    for (std::size_t i = 0; i < commit.file_changes.size(); ++i) {
        const auto& fc = commit.file_changes[i];
        if (i > 0) {
            out.push_back('\n');
        }
        out.append(to_string(fc.change_type)).append(" ").append(fc.path);
        for (const auto& m : fc.methods) {
            out.append(" ").append(m);
        }
    }
    return out;
}

Document commit_document(const CommitRecord& commit, const IssueKeyPattern& pattern) {
    std::string text = pattern.scrub(commit.message);
    if (!commit.file_changes.empty()) {
        text.push_back('\n');
        text.append(code_terms(commit));
        text = pattern.scrub(text);
    }
    Document doc;
    doc.doc_id = commit.hash;
    doc.token_count = retrieval::tokenize(text).size();
    doc.text = std::move(text);
    return doc;
}

std::string issue_query(const IssueRecord& issue, const IssueKeyPattern& pattern) {
    return pattern.scrub(issue.title + " " + issue.description);
}

} // namespace commitlink::corpus
