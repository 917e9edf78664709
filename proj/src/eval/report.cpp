#include "commitlink/eval/report.hpp"

#include "commitlink/common/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace commitlink::eval {

namespace {

double metric_value(const MetricValues& m, Metric metric) {
    switch (metric) {
    case Metric::precision:
        return m.precision;
    case Metric::hit:
        return m.hit;
    case Metric::recall:
        return m.recall;
    case Metric::mrr:
        return m.mrr;
    case Metric::ndcg:
        return m.ndcg;
    }
    return 0.0;
}

nlohmann::json metrics_json(const MetricValues& m) {
    return {{"precision", m.precision}, {"hit", m.hit}, {"recall", m.recall}, {"mrr", m.mrr}, {"ndcg", m.ndcg}};
}

} // namespace

EvaluationReport evaluate_run(const std::map<std::string, retrieval::RankedList>& lists, const Judgments& judgments,
                              std::span<const std::size_t> ks, const std::vector<std::vector<std::string>>& samples,
                              std::string name, std::string config_fingerprint) {
    for (const auto k : ks) {
        if (k == 0) {
            throw ConfigError("evaluation cutoffs must be at least 1");
        }
    }
    EvaluationReport report;
    report.name = std::move(name);
    report.config_fingerprint = std::move(config_fingerprint);
    report.ks.assign(ks.begin(), ks.end());

    std::set<std::string> unjudged;
    for (const auto& [qid, list] : lists) {
        if (!judgments.contains(qid)) {
            unjudged.insert(qid);
        }
    }
    std::map<std::string, QueryRow> rows;
    for (const auto& sample : samples) {
        std::vector<std::string> kept;
        for (const auto& qid : sample) {
            const auto judged = judgments.find(qid);
            if (judged == judgments.end() || judged->second.empty()) {
                unjudged.insert(qid);
                continue;
            }
            kept.push_back(qid);
            if (rows.contains(qid)) {
                continue;
            }
            const auto it = lists.find(qid);
            const retrieval::RankedList empty{qid, {}, {}};
            const auto& list = it == lists.end() ? empty : it->second;
            QueryRow row;
            row.query_id = qid;
            row.has_list = it != lists.end();
            row.total_relevant = judged->second.size();
            row.first_relevant_rank = first_relevant_rank(list, judged->second);
            row.reciprocal_rank = reciprocal_rank(list, judged->second);
            for (const auto k : ks) {
                row.at_k[k] = metrics_at_k(list, judged->second, k);
            }
            rows.emplace(qid, std::move(row));
        }
        if (!kept.empty()) {
            report.samples.push_back(std::move(kept));
        }
    }
    if (report.samples.empty()) {
        throw DataError("evaluation " + report.name + " has no judged queries");
    }
    report.excluded_queries = unjudged.size();
    report.query_count = rows.size();

    const double n_samples = static_cast<double>(report.samples.size());
    for (const auto k : ks) {
        MetricValues total;
        for (const auto& sample : report.samples) {
            MetricValues sum;
            for (const auto& qid : sample) {
                const auto& m = rows.at(qid).at_k.at(k);
                sum.precision += m.precision;
                sum.hit += m.hit;
                sum.recall += m.recall;
                sum.mrr += m.mrr;
                sum.ndcg += m.ndcg;
            }
            const double n = static_cast<double>(sample.size());
            total.precision += sum.precision / n;
            total.hit += sum.hit / n;
            total.recall += sum.recall / n;
            total.mrr += sum.mrr / n;
            total.ndcg += sum.ndcg / n;
        }
        report.means[k] = {total.precision / n_samples, total.hit / n_samples, total.recall / n_samples,
                           total.mrr / n_samples, total.ndcg / n_samples};
    }
    double rr_total = 0.0;
    for (const auto& sample : report.samples) {
        double sum = 0.0;
        for (const auto& qid : sample) {
            sum += rows.at(qid).reciprocal_rank;
        }
        rr_total += sum / static_cast<double>(sample.size());
    }
    report.mrr_unbounded = rr_total / n_samples;
    report.rows.reserve(rows.size());
    for (auto& [qid, row] : rows) {
        report.rows.push_back(std::move(row));
    }
    return report;
}

EvaluationReport evaluate_run(const std::map<std::string, retrieval::RankedList>& lists, const Judgments& judgments,
                              std::span<const std::size_t> ks, std::string name, std::string config_fingerprint) {
    std::vector<std::string> all;
    all.reserve(judgments.size());
    for (const auto& [qid, relevant] : judgments) {
        all.push_back(qid);
    }
    return evaluate_run(lists, judgments, ks, {all}, std::move(name), std::move(config_fingerprint));
}

nlohmann::json to_json(const EvaluationReport& r) {
    nlohmann::json means = nlohmann::json::object();
    for (const auto& [k, m] : r.means) {
        means[std::to_string(k)] = metrics_json(m);
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json at_k = nlohmann::json::object();
        for (const auto& [k, m] : row.at_k) {
            at_k[std::to_string(k)] = metrics_json(m);
        }
        rows.push_back({{"query_id", row.query_id},
                        {"has_list", row.has_list},
                        {"total_relevant", row.total_relevant},
                        {"first_relevant_rank", row.first_relevant_rank ? nlohmann::json(*row.first_relevant_rank)
                                                                        : nlohmann::json(nullptr)},
                        {"reciprocal_rank", row.reciprocal_rank},
                        {"metrics", std::move(at_k)}});
    }
    std::vector<std::size_t> sizes;
    for (const auto& s : r.samples) {
        sizes.push_back(s.size());
    }
    return {{"name", r.name},
            {"config_fingerprint", r.config_fingerprint},
            {"ks", r.ks},
            {"query_count", r.query_count},
            {"excluded_queries", r.excluded_queries},
            {"sample_sizes", sizes},
            {"samples", r.samples},
            {"means", std::move(means)},
            {"mrr_unbounded", r.mrr_unbounded},
            {"rows", std::move(rows)}};
}

std::string column_label(Metric metric, std::size_t k) {
    static constexpr const char* kNames[] = {"P", "Hit", "R", "MRR", "NDCG"};
    return std::string(kNames[static_cast<int>(metric)]) + "@" + std::to_string(k);
}

std::vector<std::pair<Metric, std::size_t>> summary_columns() {
    return {{Metric::precision, 1}, {Metric::recall, 1},  {Metric::precision, 10}, {Metric::hit, 10},
            {Metric::recall, 10},   {Metric::mrr, 10},    {Metric::ndcg, 10},      {Metric::precision, 20},
            {Metric::hit, 20},      {Metric::recall, 20}, {Metric::mrr, 20},       {Metric::ndcg, 20}};
}

std::vector<std::pair<Metric, std::size_t>> columns_for(std::span<const std::size_t> ks) {
    std::vector<std::pair<Metric, std::size_t>> out;
    for (const auto k : ks) {
        for (const auto m : {Metric::precision, Metric::hit, Metric::recall, Metric::mrr, Metric::ndcg}) {
            out.emplace_back(m, k);
        }
    }
    return out;
}

std::string format_table(std::span<const EvaluationReport> reports,
                         const std::vector<std::pair<Metric, std::size_t>>& columns) {
    std::size_t name_width = 4;
    for (const auto& r : reports) {
        name_width = std::max(name_width, r.name.size());
    }
    std::vector<std::size_t> widths;
    for (const auto& [metric, k] : columns) {
        widths.push_back(std::max<std::size_t>(5, column_label(metric, k).size()));
    }
    auto pad = [](std::string s, std::size_t w, bool left) {
        if (s.size() < w) {
            s = left ? s + std::string(w - s.size(), ' ') : std::string(w - s.size(), ' ') + s;
        }
        return s;
    };
    std::string out = pad("name", name_width, true);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out += "  " + pad(column_label(columns[c].first, columns[c].second), widths[c], false);
    }
    out += "\n";
    for (const auto& r : reports) {
        out += pad(r.name, name_width, true);
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto it = r.means.find(columns[c].second);
            std::string cell = "-";
            if (it != r.means.end()) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.3f", metric_value(it->second, columns[c].first));
                cell = buf;
            }
            out += "  " + pad(cell, widths[c], false);
        }
        out += "\n";
    }
    return out;
}

} // namespace commitlink::eval
