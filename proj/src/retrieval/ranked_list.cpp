#include "commitlink/retrieval/ranked_list.hpp"

#include <algorithm>

namespace commitlink::retrieval {

void RankedList::sort_entries() {
    std::sort(entries.begin(), entries.end(), ranks_before);
}

std::optional<std::size_t> RankedList::rank_of(const std::string& doc_id) const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].doc_id == doc_id) {
            return i + 1;
        }
    }
    return std::nullopt;
}

RankedList RankedList::top(std::size_t k) const {
    RankedList out{query_id, {}, provenance};
    out.entries.assign(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(std::min(k, entries.size())));
    return out;
}

void to_json(nlohmann::json& j, const RankedList& list) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : list.entries) {
        entries.push_back(nlohmann::json::array({e.doc_id, e.score}));
    }
    j = nlohmann::json{{"query_id", list.query_id}, {"provenance", list.provenance}, {"entries", std::move(entries)}};
}

void from_json(const nlohmann::json& j, RankedList& list) {
    list.query_id = j.at("query_id").get<std::string>();
    list.provenance = j.value("provenance", std::string());
    list.entries.clear();
    for (const auto& e : j.at("entries")) {
        list.entries.push_back({e.at(0).get<std::string>(), e.at(1).get<double>()});
    }
}

} // namespace commitlink::retrieval
