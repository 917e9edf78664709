#include "commitlink/rerank/reranker.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace commitlink::rerank {

RerankOutcome rerank_with_model(const BatchScorer& scorer, const retrieval::RankedList& candidates, std::size_t k,
                                std::string provenance) {
    if (candidates.size() > k) {
        throw std::invalid_argument("rerank_with_model: " + std::to_string(candidates.size()) +
                                    " candidates exceed k=" + std::to_string(k));
    }
    RerankOutcome outcome;
    std::vector<std::optional<double>> scores;
    try {
        scores = scorer(candidates);
        if (scores.size() != candidates.size()) {
            throw std::runtime_error("scorer returned " + std::to_string(scores.size()) + " scores for " +
                                     std::to_string(candidates.size()) + " candidates");
        }
    } catch (const std::exception& e) {
        spdlog::warn("scoring failed for {}: {}; keeping retrieval order", candidates.query_id, e.what());
        scores.assign(candidates.size(), std::nullopt);
        outcome.fallback = !candidates.empty();
        outcome.error = e.what();
    }
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> values(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (scores[i] && std::isfinite(*scores[i])) {
            values[i] = *scores[i];
        } else {
            values[i] = kFailedScore;
            ++outcome.failed_pairs;
        }
    }
    if (!outcome.fallback && outcome.failed_pairs > 0) {
        spdlog::warn("{} of {} pairs failed to score for {}", outcome.failed_pairs, candidates.size(),
                     candidates.query_id);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    outcome.list.query_id = candidates.query_id;
    outcome.list.provenance = provenance.empty() ? candidates.provenance : std::move(provenance);
    outcome.list.entries.reserve(order.size());
    for (const auto i : order) {
        outcome.list.entries.push_back({candidates.entries[i].doc_id, values[i]});
    }
    return outcome;
}

BatchScorer identity_scorer() {
    return [](const retrieval::RankedList& candidates) {
        std::vector<std::optional<double>> out;
        out.reserve(candidates.size());
        for (const auto& e : candidates.entries) {
            out.emplace_back(e.score);
        }
        return out;
    };
}

BatchScorer per_pair_scorer(std::function<double(const retrieval::ScoredDoc&)> score) {
    return [score = std::move(score)](const retrieval::RankedList& candidates) {
        std::vector<std::optional<double>> out;
        out.reserve(candidates.size());
        for (const auto& e : candidates.entries) {
            try {
                const double s = score(e);
                out.emplace_back(std::isfinite(s) ? std::optional<double>(s) : std::nullopt);
            } catch (const std::exception& ex) {
                spdlog::warn("scoring {} for {} failed: {}", e.doc_id, candidates.query_id, ex.what());
                out.emplace_back(std::nullopt);
            }
        }
        return out;
    };
}

} // namespace commitlink::rerank
