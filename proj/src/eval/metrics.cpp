#include "commitlink/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace commitlink::eval {

std::optional<std::size_t> first_relevant_rank(const retrieval::RankedList& ranked,
                                               const std::set<std::string>& relevant) {
    for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
        if (relevant.contains(ranked.entries[i].doc_id)) {
            return i + 1;
        }
    }
    return std::nullopt;
}

MetricValues metrics_at_k(const retrieval::RankedList& ranked, const std::set<std::string>& relevant, std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("metrics_at_k: k must be at least 1");
    }
    if (relevant.empty()) {
        throw std::invalid_argument("metrics_at_k: query " + ranked.query_id + " has no relevant documents");
    }
    const auto depth = std::min(k, ranked.entries.size());
    std::size_t rel = 0;
    std::optional<std::size_t> first;
    double dcg = 0.0;
    for (std::size_t i = 0; i < depth; ++i) {
        if (relevant.contains(ranked.entries[i].doc_id)) {
            ++rel;
            if (!first) {
                first = i + 1;
            }
            dcg += 1.0 / std::log2(static_cast<double>(i + 2));
        }
    }
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(relevant.size(), k); ++i) {
        idcg += 1.0 / std::log2(static_cast<double>(i + 2));
    }
    MetricValues m;
    m.precision = static_cast<double>(rel) / static_cast<double>(k);
    m.hit = first ? 1.0 : 0.0;
    m.recall = static_cast<double>(rel) / static_cast<double>(relevant.size());
    m.mrr = first ? 1.0 / static_cast<double>(*first) : 0.0;
    m.ndcg = dcg / idcg;
    return m;
}

double reciprocal_rank(const retrieval::RankedList& ranked, const std::set<std::string>& relevant) {
    const auto r = first_relevant_rank(ranked, relevant);
    return r ? 1.0 / static_cast<double>(*r) : 0.0;
}

} // namespace commitlink::eval
