#include "commitlink/rerank/features.hpp"

#include "commitlink/corpus/documents.hpp"
#include "commitlink/retrieval/tokenizer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace commitlink::rerank {

namespace {

std::string normalized_name(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(first, last - first + 1));
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

bool same_person(std::string_view a, std::string_view b) {
    const auto x = normalized_name(a);
    return !x.empty() && x == normalized_name(b);
}

} // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() {
    static const std::array<std::string_view, kFeatureCount> names{
        "tfidf_cosine_message", "tfidf_cosine_code", "token_jaccard",        "shared_token_count",
        "shared_rare_token_count", "query_length",   "document_length",      "bm25_score",
        "days_since_creation",  "days_to_closure",   "within_closure_buffer", "author_is_reporter",
        "author_is_assignee",   "changed_files",     "changed_methods",      "rrf_score"};
    return names;
}

CandidateInfo make_candidate_info(const corpus::CommitRecord& commit, const corpus::IssueKeyPattern& pattern) {
    CandidateInfo info;
    info.commit = &commit;
    info.message_tokens = retrieval::tokenize(pattern.scrub(commit.message));
    info.code_tokens = retrieval::tokenize(pattern.scrub(corpus::code_terms(commit)));
    info.tokens = retrieval::tokenize(corpus::commit_document(commit, pattern).text);
    return info;
}

FeatureContext::FeatureContext(const corpus::IssueRecord& issue, retrieval::TokenStream query_tokens,
                               std::span<const CandidateInfo* const> pool, const retrieval::RankedList& retrieval_list,
                               FeatureOptions options)
    : issue_(issue), query_tokens_(std::move(query_tokens)), options_(options) {
    std::vector<retrieval::TokenStream> pool_tokens;
    std::vector<std::string> pool_ids;
    pool_tokens.reserve(pool.size());
    for (const auto* c : pool) {
        pool_tokens.push_back(c->tokens);
        pool_ids.push_back(c->commit->hash);
        pool_ordinal_.emplace(c->commit->hash, pool_ids.size() - 1);
        for (const auto& t : std::set<std::string>(c->tokens.begin(), c->tokens.end())) {
            ++pool_df_[t];
        }
    }
    tfidf_ = TfidfModel::fit(pool_tokens);
    query_vector_ = tfidf_.transform(query_tokens_);
    if (!pool.empty()) {
        bm25_ = retrieval::SparseIndex::build(pool_ids, pool_tokens, retrieval::SparseVariant::bm25, options_.bm25);
    }
    for (const auto& e : retrieval_list.entries) {
        retrieval_scores_.emplace(e.doc_id, e.score);
    }
}

double FeatureContext::frlink_score(const CandidateInfo& candidate) const {
    if (query_tokens_.empty()) {
        spdlog::warn("empty issue text for {}; frlink score is 0", corpus::query_id(issue_));
        return 0.0;
    }
    return sparse_dot(query_vector_, tfidf_.transform(candidate.tokens));
}

FeatureVector FeatureContext::extract(const CandidateInfo& candidate) const {
    const auto& commit = *candidate.commit;
    FeatureVector f{};

    f[tfidf_cosine_message] = sparse_dot(query_vector_, tfidf_.transform(candidate.message_tokens));
    f[tfidf_cosine_code] = sparse_dot(query_vector_, tfidf_.transform(candidate.code_tokens));

    const std::set<std::string> q(query_tokens_.begin(), query_tokens_.end());
    const std::set<std::string> d(candidate.tokens.begin(), candidate.tokens.end());
    std::vector<std::string> shared;
    std::set_intersection(q.begin(), q.end(), d.begin(), d.end(), std::back_inserter(shared));
    const auto union_size = q.size() + d.size() - shared.size();
    f[token_jaccard] = union_size == 0 ? 0.0 : static_cast<double>(shared.size()) / static_cast<double>(union_size);
    f[shared_token_count] = static_cast<double>(shared.size());
    f[shared_rare_token_count] = static_cast<double>(std::count_if(shared.begin(), shared.end(), [&](const auto& t) {
        const auto it = pool_df_.find(t);
        return it == pool_df_.end() || it->second <= 2;
    }));
    f[query_length] = static_cast<double>(query_tokens_.size());
    f[document_length] = static_cast<double>(candidate.tokens.size());
    if (bm25_) {
        const auto it = pool_ordinal_.find(commit.hash);
        f[bm25_score] = it != pool_ordinal_.end() ? bm25_->score(query_tokens_, it->second)
                                                  : bm25_->score_external(query_tokens_, candidate.tokens);
    }

    f[days_since_creation] = days_between(issue_.created_at, commit.committed_at);
    if (const auto closed = issue_.usable_closed_at()) {
        const double to_closure = days_between(commit.committed_at, *closed);
        f[days_to_closure] = to_closure;
        f[within_closure_buffer] =
            (to_closure <= options_.closure_before_days && -to_closure <= options_.closure_after_days) ? 1.0 : 0.0;
    }
    f[author_is_reporter] = same_person(commit.author, issue_.reporter) ? 1.0 : 0.0;
    f[author_is_assignee] = issue_.assignee && same_person(commit.author, *issue_.assignee) ? 1.0 : 0.0;
    f[changed_files] = static_cast<double>(commit.file_changes.size());
    std::size_t methods = 0;
    for (const auto& fc : commit.file_changes) {
        methods += fc.methods.size();
    }
    f[changed_methods] = static_cast<double>(methods);
    const auto it = retrieval_scores_.find(commit.hash);
    f[rrf_score] = it == retrieval_scores_.end() ? 0.0 : it->second;

    for (auto& x : f) {
        if (!std::isfinite(x)) {
            x = 0.0;
        }
    }
    return f;
}

} // namespace commitlink::rerank
