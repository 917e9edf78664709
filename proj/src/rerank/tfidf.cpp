#include "commitlink/rerank/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace commitlink::rerank {

TfidfModel TfidfModel::fit(std::span<const retrieval::TokenStream> docs) {
    std::map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
        const std::set<std::string> unique(doc.begin(), doc.end());
        for (const auto& t : unique) {
            ++df[t];
        }
    }
    TfidfModel model;
    model.doc_count_ = docs.size();
    model.idf_.reserve(df.size());
    const double n = static_cast<double>(docs.size());
    for (const auto& [term, count] : df) {
        model.vocab_.emplace(term, static_cast<std::uint32_t>(model.idf_.size()));
        model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    return model;
}

double TfidfModel::idf(const std::string& term) const {
    const auto it = vocab_.find(term);
    return it == vocab_.end() ? 0.0 : idf_[it->second];
}

SparseVector TfidfModel::transform(const retrieval::TokenStream& tokens) const {
    std::map<std::uint32_t, double> counts;
    for (const auto& t : tokens) {
        const auto it = vocab_.find(t);
        if (it != vocab_.end()) {
            counts[it->second] += 1.0;
        }
    }
    SparseVector v;
    v.reserve(counts.size());
    double norm = 0.0;
    for (const auto& [id, tf] : counts) {
        const double w = tf * idf_[id];
        v.emplace_back(id, w);
        norm += w * w;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (auto& [id, w] : v) {
            w /= norm;
        }
    }
    return v;
}

double TfidfModel::similarity(const retrieval::TokenStream& a, const retrieval::TokenStream& b) const {
    return sparse_dot(transform(a), transform(b));
}

double sparse_dot(const SparseVector& a, const SparseVector& b) {
    double s = 0.0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (i->first < j->first) {
            ++i;
        } else if (j->first < i->first) {
            ++j;
        } else {
            s += i->second * j->second;
            ++i;
            ++j;
        }
    }
    return std::clamp(s, 0.0, 1.0);
}

} // namespace commitlink::rerank
