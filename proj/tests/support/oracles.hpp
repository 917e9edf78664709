#pragma once

// Direct transliterations of the published formulas, written independently of
// the library code they check.

#include "commitlink/retrieval/ranked_list.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace commitlink::test_support {

struct OracleMetrics {
    double precision = 0.0;
    double hit = 0.0;
    double recall = 0.0;
    double mrr = 0.0;
    double ndcg = 0.0;
};

/// P@K = Rel/K, Hit@K = I(rank <= K), R@K = Rel/TotalRel, RR truncated at K,
/// NDCG with gains 2^rel - 1 and log2(i + 1) discounts.
inline OracleMetrics oracle_metrics(const std::vector<std::string>& ranking, const std::set<std::string>& relevant,
                                    std::size_t k) {
    OracleMetrics m;
    std::size_t rel_count = 0;
    double dcg = 0.0;
    for (std::size_t i = 1; i <= k && i <= ranking.size(); ++i) {
        const int rel = relevant.count(ranking[i - 1]) ? 1 : 0;
        rel_count += static_cast<std::size_t>(rel);
        dcg += (std::pow(2.0, rel) - 1.0) / std::log2(static_cast<double>(i) + 1.0);
    }
    std::size_t rank = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 1; i <= ranking.size(); ++i) {
        if (relevant.count(ranking[i - 1])) {
            rank = i;
            break;
        }
    }
    double idcg = 0.0;
    for (std::size_t i = 1; i <= std::min(relevant.size(), k); ++i) {
        idcg += (std::pow(2.0, 1) - 1.0) / std::log2(static_cast<double>(i) + 1.0);
    }
    m.precision = static_cast<double>(rel_count) / static_cast<double>(k);
    m.hit = rank <= k ? 1.0 : 0.0;
    m.recall = static_cast<double>(rel_count) / static_cast<double>(relevant.size());
    m.mrr = rank <= k ? 1.0 / static_cast<double>(rank) : 0.0;
    m.ndcg = idcg > 0.0 ? dcg / idcg : 0.0;
    return m;
}

/// BM25Okapi as written in the rank-bm25 package: idf = ln(N - n + 0.5) -
/// ln(n + 0.5), negative idfs replaced by epsilon * mean idf.
inline std::vector<double> oracle_bm25(const std::vector<std::vector<std::string>>& corpus,
                                       const std::vector<std::string>& query, double k1 = 1.5, double b = 0.75,
                                       double epsilon = 0.25) {
    const double n_docs = static_cast<double>(corpus.size());
    double total_len = 0.0;
    std::map<std::string, double> df;
    for (const auto& doc : corpus) {
        total_len += static_cast<double>(doc.size());
        for (const auto& t : std::set<std::string>(doc.begin(), doc.end())) {
            df[t] += 1.0;
        }
    }
    const double avgdl = total_len / n_docs;
    std::map<std::string, double> idf;
    double idf_sum = 0.0;
    std::vector<std::string> negative;
    for (const auto& [t, n] : df) {
        const double v = std::log(n_docs - n + 0.5) - std::log(n + 0.5);
        idf[t] = v;
        idf_sum += v;
        if (v < 0) {
            negative.push_back(t);
        }
    }
    const double eps = epsilon * idf_sum / static_cast<double>(idf.size());
    for (const auto& t : negative) {
        idf[t] = eps;
    }
    std::vector<double> scores(corpus.size(), 0.0);
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        const double dl = static_cast<double>(corpus[d].size());
        for (const auto& q : query) {
            double tf = 0.0;
            for (const auto& t : corpus[d]) {
                tf += t == q ? 1.0 : 0.0;
            }
            const double w = idf.count(q) ? idf[q] : 0.0;
            scores[d] += w * (tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl)));
        }
    }
    return scores;
}

/// Sum over lists of 1 / (k + rank), first occurrence per list only.
inline std::map<std::string, double> oracle_rrf(std::span<const retrieval::RankedList> lists, int k = 60) {
    std::map<std::string, double> scores;
    for (const auto& list : lists) {
        std::set<std::string> seen;
        for (std::size_t i = 0; i < list.entries.size(); ++i) {
            if (seen.insert(list.entries[i].doc_id).second) {
                scores[list.entries[i].doc_id] += 1.0 / (k + static_cast<double>(i + 1));
            }
        }
    }
    return scores;
}

} // namespace commitlink::test_support
