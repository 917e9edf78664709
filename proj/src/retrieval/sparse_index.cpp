#include "commitlink/retrieval/sparse_index.hpp"

#include "commitlink/common/binary_io.hpp"
#include "commitlink/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace commitlink::retrieval {

namespace {
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::string_view kMagic = "CLSPARSE";
} // namespace

std::string_view to_string(SparseVariant variant) {
    return variant == SparseVariant::bm25 ? "bm25" : "bm25l";
}

SparseIndex SparseIndex::build(std::span<const corpus::Document> docs, SparseVariant variant, Bm25Params params) {
    std::vector<std::string> ids;
    std::vector<TokenStream> tokens;
    ids.reserve(docs.size());
    tokens.reserve(docs.size());
    for (const auto& d : docs) {
        ids.push_back(d.doc_id);
        tokens.push_back(tokenize(d.text));
    }
    return build(std::move(ids), tokens, variant, params);
}

SparseIndex SparseIndex::build(std::vector<std::string> doc_ids, std::span<const TokenStream> doc_tokens,
                               SparseVariant variant, Bm25Params params) {
    if (doc_ids.empty()) {
        throw DataError("cannot build a sparse index over an empty corpus");
    }
    if (doc_ids.size() != doc_tokens.size()) {
        throw DataError("sparse index: ids and token streams differ in length");
    }
    SparseIndex index;
    index.variant_ = variant;
    index.params_ = params;
    index.doc_ids_ = std::move(doc_ids);
    index.doc_len_.reserve(doc_tokens.size());

    // Term ids are assigned in sorted order so rebuilds are identical.
    std::map<std::string, std::vector<Posting>> by_term;
    for (std::size_t d = 0; d < doc_tokens.size(); ++d) {
        index.doc_len_.push_back(static_cast<std::uint32_t>(doc_tokens[d].size()));
        std::map<std::string_view, std::uint32_t> tf;
        for (const auto& t : doc_tokens[d]) {
            ++tf[t];
        }
        for (const auto& [term, count] : tf) {
            by_term[std::string(term)].push_back({static_cast<std::uint32_t>(d), count});
        }
    }
    for (auto& [term, postings] : by_term) {
        index.term_index_.emplace(term, static_cast<std::uint32_t>(index.terms_.size()));
        index.terms_.push_back(term);
        index.postings_.push_back(std::move(postings));
    }
    index.finalize();
    return index;
}

void SparseIndex::finalize() {
    double total = 0.0;
    for (const auto len : doc_len_) {
        total += len;
    }
    avg_doc_len_ = total / static_cast<double>(doc_len_.size());

    const auto n = static_cast<double>(doc_ids_.size());
    idf_.assign(terms_.size(), 0.0);
    if (variant_ == SparseVariant::bm25) {
        double idf_sum = 0.0;
        std::vector<std::size_t> negative;
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const auto df = static_cast<double>(postings_[t].size());
            idf_[t] = std::log(n - df + 0.5) - std::log(df + 0.5);
            idf_sum += idf_[t];
            if (idf_[t] < 0) {
                negative.push_back(t);
            }
        }
        const double eps = terms_.empty() ? 0.0 : params_.epsilon * idf_sum / static_cast<double>(terms_.size());
        for (const auto t : negative) {
            idf_[t] = eps;
        }
    } else {
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const auto df = static_cast<double>(postings_[t].size());
            idf_[t] = std::log(n + 1.0) - std::log(df + 0.5);
        }
    }
}

double SparseIndex::term_weight(double idf, double tf, double dl) const {
    const double ratio = avg_doc_len_ > 0.0 ? dl / avg_doc_len_ : 1.0;
    const double norm = 1.0 - params_.b + params_.b * ratio;
    if (variant_ == SparseVariant::bm25) {
        return idf * (tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm));
    }
    const double ctd = tf / norm;
    return idf * (params_.k1 + 1.0) * (ctd + params_.delta) / (params_.k1 + ctd + params_.delta);
}

std::size_t SparseIndex::doc_freq(const std::string& term) const {
    const auto it = term_index_.find(term);
    return it == term_index_.end() ? 0 : postings_[it->second].size();
}

std::size_t SparseIndex::term_freq(std::size_t doc, const std::string& term) const {
    const auto it = term_index_.find(term);
    if (it == term_index_.end()) {
        return 0;
    }
    const auto& plist = postings_[it->second];
    const auto p = std::lower_bound(plist.begin(), plist.end(), doc,
                                    [](const Posting& a, std::size_t d) { return a.doc < d; });
    return (p != plist.end() && p->doc == doc) ? p->tf : 0;
}

double SparseIndex::idf(const std::string& term) const {
    const auto it = term_index_.find(term);
    return it == term_index_.end() ? 0.0 : idf_[it->second];
}

std::vector<double> SparseIndex::scores(const TokenStream& query) const {
    std::vector<double> out(doc_ids_.size(), 0.0);
    for (const auto& q : query) {
        const auto it = term_index_.find(q);
        if (it == term_index_.end()) {
            continue;
        }
        const auto t = it->second;
        const auto& plist = postings_[t];
        if (variant_ == SparseVariant::bm25) {
            for (const auto& p : plist) {
                out[p.doc] += term_weight(idf_[t], p.tf, doc_len_[p.doc]);
            }
            continue;
        }
        // bm25l credits absent terms too, so walk every document.
        std::size_t next = 0;
        for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
            double tf = 0.0;
            if (next < plist.size() && plist[next].doc == d) {
                tf = plist[next].tf;
                ++next;
            }
            out[d] += term_weight(idf_[t], tf, doc_len_[d]);
        }
    }
    return out;
}

double SparseIndex::score(const TokenStream& query, std::size_t doc) const {
    double s = 0.0;
    for (const auto& q : query) {
        const auto it = term_index_.find(q);
        if (it == term_index_.end()) {
            continue;
        }
        const double tf = static_cast<double>(term_freq(doc, q));
        if (variant_ == SparseVariant::bm25 && tf == 0.0) {
            continue;
        }
        s += term_weight(idf_[it->second], tf, doc_len_[doc]);
    }
    return s;
}

double SparseIndex::score_external(const TokenStream& query, const TokenStream& doc_tokens) const {
    std::map<std::string_view, double> tf;
    for (const auto& t : doc_tokens) {
        tf[t] += 1.0;
    }
    const auto dl = static_cast<double>(doc_tokens.size());
    double s = 0.0;
    for (const auto& q : query) {
        const auto it = term_index_.find(q);
        if (it == term_index_.end()) {
            continue;
        }
        const auto f = tf.find(q);
        const double count = f == tf.end() ? 0.0 : f->second;
        if (variant_ == SparseVariant::bm25 && count == 0.0) {
            continue;
        }
        s += term_weight(idf_[it->second], count, dl);
    }
    return s;
}

const std::string& SparseIndex::provenance() const {
    static const std::string kBm25 = "bm25";
    static const std::string kBm25l = "bm25l";
    return variant_ == SparseVariant::bm25 ? kBm25 : kBm25l;
}

RankedList SparseIndex::search(const TokenStream& query, std::size_t k, const std::string& query_id) const {
    const auto all = scores(query);
    RankedList list{query_id, {}, provenance()};
    list.entries.reserve(all.size());
    for (std::size_t d = 0; d < all.size(); ++d) {
        list.entries.push_back({doc_ids_[d], all[d]});
    }
    const auto keep = std::min(k, list.entries.size());
    std::partial_sort(list.entries.begin(), list.entries.begin() + static_cast<std::ptrdiff_t>(keep),
                      list.entries.end(), ranks_before);
    list.entries.resize(keep);
    return list;
}

RankedList SparseIndex::search_subset(const TokenStream& query, std::size_t k, std::span<const std::size_t> docs,
                                      const std::string& query_id) const {
    RankedList list{query_id, {}, provenance()};
    list.entries.reserve(docs.size());
    for (const auto d : docs) {
        list.entries.push_back({doc_ids_[d], score(query, d)});
    }
    const auto keep = std::min(k, list.entries.size());
    std::partial_sort(list.entries.begin(), list.entries.begin() + static_cast<std::ptrdiff_t>(keep),
                      list.entries.end(), ranks_before);
    list.entries.resize(keep);
    return list;
}

void SparseIndex::save(std::ostream& out) const {
    binio::write_header(out, kMagic, kFormatVersion);
    binio::write<std::uint8_t>(out, variant_ == SparseVariant::bm25 ? 0 : 1);
    binio::write(out, params_.k1);
    binio::write(out, params_.b);
    binio::write(out, params_.epsilon);
    binio::write(out, params_.delta);
    binio::write_strings(out, doc_ids_);
    binio::write_vector(out, doc_len_);
    binio::write_strings(out, terms_);
    for (const auto& plist : postings_) {
        binio::write_vector(out, plist);
    }
}

SparseIndex SparseIndex::load(std::istream& in) {
    binio::read_header(in, kMagic, kFormatVersion);
    SparseIndex index;
    index.variant_ = binio::read<std::uint8_t>(in) == 0 ? SparseVariant::bm25 : SparseVariant::bm25l;
    index.params_.k1 = binio::read<double>(in);
    index.params_.b = binio::read<double>(in);
    index.params_.epsilon = binio::read<double>(in);
    index.params_.delta = binio::read<double>(in);
    index.doc_ids_ = binio::read_strings(in);
    index.doc_len_ = binio::read_vector<std::uint32_t>(in);
    index.terms_ = binio::read_strings(in);
    if (index.doc_ids_.empty() || index.doc_len_.size() != index.doc_ids_.size()) {
        throw DataError("corrupt sparse index");
    }
    for (std::size_t t = 0; t < index.terms_.size(); ++t) {
        index.term_index_.emplace(index.terms_[t], static_cast<std::uint32_t>(t));
        index.postings_.push_back(binio::read_vector<Posting>(in));
    }
    index.finalize();
    return index;
}

} // namespace commitlink::retrieval
