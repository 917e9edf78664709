#include "index_impl.hpp"

#include "commitlink/common/binary_io.hpp"
#include "commitlink/common/errors.hpp"

#include <algorithm>
#include <bit>
#include <random>

namespace commitlink::retrieval::detail {

namespace {

std::vector<float> random_planes(std::size_t nbits, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    std::vector<float> planes(nbits * dim);
    for (auto& x : planes) {
        x = gauss(rng);
    }
    return planes;
}

} // namespace

LshIndex::LshIndex(VectorStore store, LshParams params)
    : LshIndex(std::move(store), params, {}) {}

LshIndex::LshIndex(VectorStore store, LshParams params, std::vector<float> planes)
    : VectorIndex(std::move(store)), params_(params), planes_(std::move(planes)) {
    if (params_.nbits == 0) {
        throw ConfigError("lsh: nbits must be positive");
    }
    words_ = (params_.nbits + 63) / 64;
    if (planes_.empty()) {
        planes_ = random_planes(params_.nbits, store_.dim(), params_.seed);
    }
    if (planes_.size() != params_.nbits * store_.dim()) {
        throw DataError("lsh: hyperplane matrix has wrong shape");
    }
    codes_.reserve(words_ * store_.size());
    for (std::size_t i = 0; i < store_.size(); ++i) {
        const auto code = encode(store_.row(i));
        codes_.insert(codes_.end(), code.begin(), code.end());
    }
}

std::vector<std::uint64_t> LshIndex::encode(std::span<const float> v) const {
    std::vector<std::uint64_t> code(words_, 0);
    const auto dim = store_.dim();
    for (std::size_t b = 0; b < params_.nbits; ++b) {
        const double side = dot(std::span<const float>(planes_.data() + b * dim, dim), v);
        if (side >= 0.0) {
            code[b / 64] |= std::uint64_t{1} << (b % 64);
        }
    }
    return code;
}

// Score is 1 - h/nbits plus a cosine term smaller than one Hamming step, so
// sorting by score orders by Hamming distance first and cosine second.
RankedList LshIndex::search(std::span<const float> query, std::size_t k) const {
    check_query(query);
    RankedList list{{}, {}, std::string(to_string(kind()))};
    if (store_.size() == 0) {
        return list;
    }
    const auto code = encode(query);
    const double nbits = static_cast<double>(params_.nbits);
    list.entries.reserve(store_.size());
    for (std::size_t i = 0; i < store_.size(); ++i) {
        const auto sig = signature(i);
        int hamming = 0;
        for (std::size_t w = 0; w < words_; ++w) {
            hamming += std::popcount(sig[w] ^ code[w]);
        }
        const double cosine = store_.similarity(i, query);
        list.entries.push_back({store_.ids()[i], 1.0 - hamming / nbits + cosine / (4.0 * nbits)});
    }
    const auto keep = std::min(k, list.entries.size());
    std::partial_sort(list.entries.begin(), list.entries.begin() + static_cast<std::ptrdiff_t>(keep),
                      list.entries.end(), ranks_before);
    list.entries.resize(keep);
    return list;
}

void LshIndex::save_structure(std::ostream& out) const {
    binio::write<std::uint64_t>(out, params_.nbits);
    binio::write<std::uint64_t>(out, params_.seed);
    binio::write_vector(out, planes_);
}

std::unique_ptr<LshIndex> LshIndex::load(VectorStore store, std::istream& in) {
    LshParams params;
    params.nbits = binio::read<std::uint64_t>(in);
    params.seed = binio::read<std::uint64_t>(in);
    auto planes = binio::read_vector<float>(in);
    return std::unique_ptr<LshIndex>(new LshIndex(std::move(store), params, std::move(planes)));
}

} // namespace commitlink::retrieval::detail
