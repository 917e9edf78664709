#pragma once

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace commitlink::retrieval {

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const ScoredDoc&) const = default;
};

/// Score descending, then doc_id ascending.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.doc_id < b.doc_id;
}

/// Output of any retriever, fuser or reranker. Ranks are 1-based positions
/// in `entries`.
struct RankedList {
    std::string query_id;
    std::vector<ScoredDoc> entries;
    std::string provenance;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }

    /// Sorts with ranks_before.
    void sort_entries();

    /// 1-based rank, or nullopt when absent.
    std::optional<std::size_t> rank_of(const std::string& doc_id) const;

    /// Copy of the first k entries.
    RankedList top(std::size_t k) const;

    bool operator==(const RankedList&) const = default;
};

void to_json(nlohmann::json& j, const RankedList& list);
void from_json(const nlohmann::json& j, RankedList& list);

} // namespace commitlink::retrieval
