#pragma once

#include "commitlink/retrieval/ranked_list.hpp"

#include <span>

namespace commitlink::retrieval {

inline constexpr int kDefaultRrfK = 60;
inline constexpr std::size_t kDefaultRrfTopN = 50;

/// Reciprocal Rank Fusion: score(d) = sum over lists containing d of
/// 1 / (rrf_k + rank), ranks 1-based. Returns the top_n docs. The result does
/// not depend on the order of `lists`. Throws std::invalid_argument when
/// `lists` is empty.
RankedList rrf_fuse(std::span<const RankedList> lists, int rrf_k = kDefaultRrfK, std::size_t top_n = kDefaultRrfTopN,
                    std::string provenance = "rrf");

} // namespace commitlink::retrieval
