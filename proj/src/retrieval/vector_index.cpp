#include "commitlink/retrieval/vector_index.hpp"

#include "index_impl.hpp"

#include "commitlink/common/binary_io.hpp"
#include "commitlink/common/errors.hpp"

#include <algorithm>
#include <cmath>

namespace commitlink::retrieval {

namespace {
constexpr std::string_view kMagic = "CLVINDEX";
constexpr std::uint32_t kFormatVersion = 1;
constexpr double kUnitTolerance = 1e-6;
} // namespace

std::string_view to_string(VectorIndexKind kind) {
    switch (kind) {
    case VectorIndexKind::flat:
        return "flat";
    case VectorIndexKind::hnsw:
        return "hnsw";
    case VectorIndexKind::lsh:
        return "lsh";
    case VectorIndexKind::rp_forest:
        return "rp_forest";
    }
    return "flat";
}

std::optional<VectorIndexKind> parse_vector_index_kind(std::string_view text) {
    for (auto kind : {VectorIndexKind::flat, VectorIndexKind::hnsw, VectorIndexKind::lsh, VectorIndexKind::rp_forest}) {
        if (text == to_string(kind)) {
            return kind;
        }
    }
    return std::nullopt;
}

void to_json(nlohmann::json& j, const VectorIndexParams& p) {
    j = nlohmann::json{
        {"hnsw", {{"m", p.hnsw.m}, {"ef_construction", p.hnsw.ef_construction}, {"ef_search", p.hnsw.ef_search},
                  {"seed", p.hnsw.seed}}},
        {"lsh", {{"nbits", p.lsh.nbits}, {"seed", p.lsh.seed}}},
        {"rp_forest", {{"n_trees", p.rp_forest.n_trees}, {"leaf_size", p.rp_forest.leaf_size},
                       {"search_k_factor", p.rp_forest.search_k_factor}, {"seed", p.rp_forest.seed}}}};
}

VectorStore::VectorStore(std::vector<std::string> ids, std::span<const Vector> vectors) : ids_(std::move(ids)) {
    if (ids_.size() != vectors.size()) {
        throw DataError("vector store: ids and vectors differ in length");
    }
    dim_ = vectors.empty() ? 0 : vectors.front().size();
    data_.reserve(dim_ * vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const auto& v = vectors[i];
        if (v.size() != dim_) {
            throw DataError("vector for doc " + ids_[i] + " has dimension " + std::to_string(v.size()) +
                            ", expected " + std::to_string(dim_));
        }
        const double norm = std::sqrt(dot(v, v));
        if (std::abs(norm - 1.0) > kUnitTolerance) {
            throw DataError("vector for doc " + ids_[i] + " is not unit length");
        }
        data_.insert(data_.end(), v.begin(), v.end());
    }
}

void VectorStore::save(std::ostream& out) const {
    binio::write_strings(out, ids_);
    binio::write<std::uint64_t>(out, dim_);
    binio::write_vector(out, data_);
}

VectorStore VectorStore::load(std::istream& in) {
    VectorStore store;
    store.ids_ = binio::read_strings(in);
    store.dim_ = binio::read<std::uint64_t>(in);
    store.data_ = binio::read_vector<float>(in);
    if (store.data_.size() != store.ids_.size() * store.dim_) {
        throw DataError("corrupt vector store");
    }
    return store;
}

void VectorIndex::check_query(std::span<const float> query) const {
    if (query.size() != store_.dim() && store_.size() > 0) {
        throw DataError("query dimension " + std::to_string(query.size()) + " does not match index dimension " +
                        std::to_string(store_.dim()));
    }
}

RankedList VectorIndex::rank_candidates(std::span<const std::uint32_t> candidates, std::span<const float> query,
                                        std::size_t k) const {
    RankedList list{{}, {}, std::string(to_string(kind()))};
    list.entries.reserve(candidates.size());
    for (const auto c : candidates) {
        list.entries.push_back({store_.ids()[c], store_.similarity(c, query)});
    }
    const auto keep = std::min(k, list.entries.size());
    std::partial_sort(list.entries.begin(), list.entries.begin() + static_cast<std::ptrdiff_t>(keep),
                      list.entries.end(), ranks_before);
    list.entries.resize(keep);
    return list;
}

void VectorIndex::save(std::ostream& out) const {
    binio::write_header(out, kMagic, kFormatVersion);
    binio::write<std::uint8_t>(out, static_cast<std::uint8_t>(kind()));
    store_.save(out);
    save_structure(out);
}

std::unique_ptr<VectorIndex> build_vector_index(VectorStore store, VectorIndexKind kind,
                                                const VectorIndexParams& params) {
    switch (kind) {
    case VectorIndexKind::flat:
        return std::make_unique<detail::FlatIndex>(std::move(store));
    case VectorIndexKind::hnsw:
        return std::make_unique<detail::HnswIndex>(std::move(store), params.hnsw);
    case VectorIndexKind::lsh:
        return std::make_unique<detail::LshIndex>(std::move(store), params.lsh);
    case VectorIndexKind::rp_forest:
        return std::make_unique<detail::RpForestIndex>(std::move(store), params.rp_forest);
    }
    throw ConfigError("unknown vector index kind");
}

std::unique_ptr<VectorIndex> build_vector_index(std::vector<std::string> ids, std::span<const Vector> vectors,
                                                VectorIndexKind kind, const VectorIndexParams& params) {
    return build_vector_index(VectorStore(std::move(ids), vectors), kind, params);
}

std::unique_ptr<VectorIndex> load_vector_index(std::istream& in) {
    binio::read_header(in, kMagic, kFormatVersion);
    const auto tag = binio::read<std::uint8_t>(in);
    auto store = VectorStore::load(in);
    switch (tag) {
    case static_cast<std::uint8_t>(VectorIndexKind::flat):
        return std::make_unique<detail::FlatIndex>(std::move(store));
    case static_cast<std::uint8_t>(VectorIndexKind::hnsw):
        return detail::HnswIndex::load(std::move(store), in);
    case static_cast<std::uint8_t>(VectorIndexKind::lsh):
        return detail::LshIndex::load(std::move(store), in);
    case static_cast<std::uint8_t>(VectorIndexKind::rp_forest):
        return detail::RpForestIndex::load(std::move(store), in);
    default:
        throw DataError("unknown vector index kind tag " + std::to_string(tag));
    }
}

} // namespace commitlink::retrieval
