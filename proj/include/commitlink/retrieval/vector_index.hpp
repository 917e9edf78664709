#pragma once

#include "commitlink/retrieval/embedding.hpp"
#include "commitlink/retrieval/ranked_list.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace commitlink::retrieval {

enum class VectorIndexKind { flat, hnsw, lsh, rp_forest };

std::string_view to_string(VectorIndexKind kind);
std::optional<VectorIndexKind> parse_vector_index_kind(std::string_view text);

struct HnswParams {
    std::size_t m = 16;
    std::size_t ef_construction = 200;
    std::size_t ef_search = 100;
    std::uint64_t seed = 42;
    bool operator==(const HnswParams&) const = default;
};

/// Signed random hyperplanes; one bit per hyperplane.
struct LshParams {
    std::size_t nbits = 256;
    std::uint64_t seed = 42;
    bool operator==(const LshParams&) const = default;
};

/// Annoy-style forest of random projection trees.
struct RpForestParams {
    std::size_t n_trees = 50;
    std::size_t leaf_size = 32;
    std::size_t search_k_factor = 1;  ///< candidate budget = factor * k * n_trees (Annoy default)
    std::uint64_t seed = 42;
    bool operator==(const RpForestParams&) const = default;
};

struct VectorIndexParams {
    HnswParams hnsw;
    LshParams lsh;
    RpForestParams rp_forest;
    bool operator==(const VectorIndexParams&) const = default;
};

void to_json(nlohmann::json& j, const VectorIndexParams& params);

/// Row-major matrix of unit vectors with their doc ids.
class VectorStore {
public:
    VectorStore() = default;
    /// Throws DataError on dimension mismatch or a non-unit vector.
    VectorStore(std::vector<std::string> ids, std::span<const Vector> vectors);

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<std::string>& ids() const { return ids_; }
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    double similarity(std::size_t i, std::span<const float> query) const { return dot(row(i), query); }

    void save(std::ostream& out) const;
    static VectorStore load(std::istream& in);

private:
    std::vector<std::string> ids_;
    std::size_t dim_ = 0;
    std::vector<float> data_;
};

/// Build-once, read-many nearest-neighbour index over unit vectors; scores are
/// cosine similarities. search() is const and safe to call concurrently.
class VectorIndex {
public:
    explicit VectorIndex(VectorStore store) : store_(std::move(store)) {}
    virtual ~VectorIndex() = default;

    virtual VectorIndexKind kind() const = 0;

    /// Top-k by the index's ranking rule; k beyond the corpus returns all
    /// reachable docs. Throws DataError when query dim differs.
    virtual RankedList search(std::span<const float> query, std::size_t k) const = 0;

    std::size_t dim() const { return store_.dim(); }
    std::size_t size() const { return store_.size(); }
    const VectorStore& store() const { return store_; }

    /// Kind tag + store + kind-specific structure.
    void save(std::ostream& out) const;

protected:
    virtual void save_structure(std::ostream& out) const = 0;
    void check_query(std::span<const float> query) const;
    /// Exact cosine on candidate rows, sorted with ranks_before, truncated to k.
    RankedList rank_candidates(std::span<const std::uint32_t> candidates, std::span<const float> query,
                               std::size_t k) const;

    VectorStore store_;
};

std::unique_ptr<VectorIndex> build_vector_index(std::vector<std::string> ids, std::span<const Vector> vectors,
                                                VectorIndexKind kind, const VectorIndexParams& params = {});
std::unique_ptr<VectorIndex> build_vector_index(VectorStore store, VectorIndexKind kind,
                                                const VectorIndexParams& params = {});

std::unique_ptr<VectorIndex> load_vector_index(std::istream& in);

} // namespace commitlink::retrieval
