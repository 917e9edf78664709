#pragma once

#include "commitlink/eval/metrics.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace commitlink::eval {

struct QueryRow {
    std::string query_id;
    bool has_list = false;         ///< false: scored as an empty ranking
    std::size_t total_relevant = 0;
    std::optional<std::size_t> first_relevant_rank;
    double reciprocal_rank = 0.0;  ///< untruncated
    std::map<std::size_t, MetricValues> at_k;
};

struct EvaluationReport {
    std::string name;
    std::string config_fingerprint;
    std::vector<std::size_t> ks;
    std::size_t query_count = 0;       ///< distinct judged queries evaluated
    std::size_t excluded_queries = 0;  ///< queries without judgments
    std::vector<std::vector<std::string>> samples;  ///< judged query ids per sample
    std::map<std::size_t, MetricValues> means;      ///< mean over samples of per-sample means
    double mrr_unbounded = 0.0;                     ///< same aggregation of reciprocal_rank
    std::vector<QueryRow> rows;                     ///< sorted by query_id
};

/// Per-sample means, then the mean over samples. Queries in a sample without
/// judgments are dropped and counted as excluded, as are lists for unjudged
/// queries; judged queries without a list count as empty rankings. Throws
/// DataError when no sample holds a judged query.
EvaluationReport evaluate_run(const std::map<std::string, retrieval::RankedList>& lists, const Judgments& judgments,
                              std::span<const std::size_t> ks, const std::vector<std::vector<std::string>>& samples,
                              std::string name = {}, std::string config_fingerprint = {});

/// Single sample holding every judged query.
EvaluationReport evaluate_run(const std::map<std::string, retrieval::RankedList>& lists, const Judgments& judgments,
                              std::span<const std::size_t> ks, std::string name = {},
                              std::string config_fingerprint = {});

nlohmann::json to_json(const EvaluationReport& report);

enum class Metric { precision, hit, recall, mrr, ndcg };

/// Column label such as "P@10" or "NDCG@20".
std::string column_label(Metric metric, std::size_t k);

/// P@1, R@1, P@10, Hit@10, R@10, MRR@10, NDCG@10, P@20, Hit@20, R@20,
/// MRR@20, NDCG@20.
std::vector<std::pair<Metric, std::size_t>> summary_columns();

/// P, Hit, R, MRR, NDCG for every k.
std::vector<std::pair<Metric, std::size_t>> columns_for(std::span<const std::size_t> ks);

/// Fixed-width text table, one row per report, values to 3 decimals; "-"
/// where a report lacks the k.
std::string format_table(std::span<const EvaluationReport> reports,
                         const std::vector<std::pair<Metric, std::size_t>>& columns);

} // namespace commitlink::eval
