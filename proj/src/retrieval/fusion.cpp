#include "commitlink/retrieval/fusion.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace commitlink::retrieval {

RankedList rrf_fuse(std::span<const RankedList> lists, int rrf_k, std::size_t top_n, std::string provenance) {
    if (lists.empty()) {
        throw std::invalid_argument("rrf_fuse needs at least one ranked list");
    }
    // Terms are summed in sorted order so the floating-point result is the
    // same whichever order the lists arrive in.
    std::map<std::string, std::vector<double>> terms;
    for (const auto& list : lists) {
        std::unordered_set<std::string> seen;
        for (std::size_t i = 0; i < list.entries.size(); ++i) {
            const auto& id = list.entries[i].doc_id;
            if (!seen.insert(id).second) {
                continue;
            }
            terms[id].push_back(1.0 / (static_cast<double>(rrf_k) + static_cast<double>(i + 1)));
        }
    }
    RankedList fused{lists.front().query_id, {}, std::move(provenance)};
    fused.entries.reserve(terms.size());
    for (auto& [id, parts] : terms) {
        std::sort(parts.begin(), parts.end());
        double score = 0.0;
        for (const auto p : parts) {
            score += p;
        }
        fused.entries.push_back({id, score});
    }
    fused.sort_entries();
    if (fused.entries.size() > top_n) {
        fused.entries.resize(top_n);
    }
    return fused;
}

} // namespace commitlink::retrieval
