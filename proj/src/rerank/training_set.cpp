#include "commitlink/rerank/training_set.hpp"

#include <spdlog/spdlog.h>

namespace commitlink::rerank {

void to_json(nlohmann::json& j, const TrainingPair& p) {
    j = nlohmann::json{{"query_id", p.query_id}, {"doc_id", p.doc_id}, {"label", p.positive ? 1 : 0}};
    j["retrieval_rank"] = p.retrieval_rank ? nlohmann::json(*p.retrieval_rank) : nlohmann::json(nullptr);
}

std::vector<TrainingPair> make_training_set(std::span<const std::string> train_query_ids,
                                            const std::map<std::string, std::set<std::string>>& true_links,
                                            const std::map<std::string, retrieval::RankedList>& candidate_lists,
                                            std::size_t negatives_per_issue) {
    static const std::set<std::string> kNone;
    std::vector<TrainingPair> out;
    for (const auto& qid : train_query_ids) {
        const auto links_it = true_links.find(qid);
        const auto& links = links_it == true_links.end() ? kNone : links_it->second;
        const auto list_it = candidate_lists.find(qid);
        const bool has_list = list_it != candidate_lists.end() && !list_it->second.empty();
        if (!has_list) {
            spdlog::warn("training issue {} has an empty candidate pool; positives only", qid);
        }
        for (const auto& doc : links) {
            std::optional<std::size_t> rank;
            if (has_list) {
                rank = list_it->second.rank_of(doc);
            }
            out.push_back({qid, doc, true, rank});
        }
        if (!has_list) {
            continue;
        }
        std::size_t taken = 0;
        const auto& entries = list_it->second.entries;
        for (std::size_t i = 0; i < entries.size() && taken < negatives_per_issue; ++i) {
            if (links.contains(entries[i].doc_id)) {
                continue;
            }
            out.push_back({qid, entries[i].doc_id, false, i + 1});
            ++taken;
        }
    }
    return out;
}

} // namespace commitlink::rerank
