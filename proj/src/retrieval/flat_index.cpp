#include "index_impl.hpp"

#include <numeric>

namespace commitlink::retrieval::detail {

RankedList FlatIndex::search(std::span<const float> query, std::size_t k) const {
    check_query(query);
    std::vector<std::uint32_t> all(store_.size());
    std::iota(all.begin(), all.end(), 0u);
    return rank_candidates(all, query, k);
}

} // namespace commitlink::retrieval::detail
