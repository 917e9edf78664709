#pragma once

#include "commitlink/retrieval/vector_index.hpp"

#include <istream>

namespace commitlink::retrieval::detail {

class FlatIndex final : public VectorIndex {
public:
    explicit FlatIndex(VectorStore store) : VectorIndex(std::move(store)) {}
    VectorIndexKind kind() const override { return VectorIndexKind::flat; }
    RankedList search(std::span<const float> query, std::size_t k) const override;

protected:
    void save_structure(std::ostream&) const override {}
};

class HnswIndex final : public VectorIndex {
public:
    HnswIndex(VectorStore store, HnswParams params);
    VectorIndexKind kind() const override { return VectorIndexKind::hnsw; }
    RankedList search(std::span<const float> query, std::size_t k) const override;

    static std::unique_ptr<HnswIndex> load(VectorStore store, std::istream& in);

    const HnswParams& params() const { return params_; }
    /// Neighbour lists of node i at `level`.
    const std::vector<std::uint32_t>& neighbors(std::size_t i, std::size_t level) const { return links_[i][level]; }
    int max_level() const { return max_level_; }

protected:
    void save_structure(std::ostream& out) const override;

private:
    HnswIndex(VectorStore store, HnswParams params, bool build);

    struct Candidate {
        double distance;
        std::uint32_t node;
    };

    double distance(std::uint32_t node, std::span<const float> query) const {
        return 1.0 - store_.similarity(node, query);
    }
    std::vector<Candidate> search_layer(std::span<const float> query, std::vector<Candidate> entry,
                                        std::size_t ef, std::size_t level, std::vector<std::uint32_t>& visited,
                                        std::uint32_t& epoch) const;
    std::vector<std::uint32_t> select_neighbors(std::vector<Candidate> candidates, std::size_t m) const;
    void insert(std::uint32_t node, int level, std::vector<std::uint32_t>& visited, std::uint32_t& epoch);
    std::size_t max_links(std::size_t level) const { return level == 0 ? 2 * params_.m : params_.m; }

    HnswParams params_;
    std::vector<std::vector<std::vector<std::uint32_t>>> links_;  // [node][level]
    std::uint32_t entry_point_ = 0;
    int max_level_ = -1;
};

class LshIndex final : public VectorIndex {
public:
    LshIndex(VectorStore store, LshParams params);
    VectorIndexKind kind() const override { return VectorIndexKind::lsh; }
    RankedList search(std::span<const float> query, std::size_t k) const override;

    static std::unique_ptr<LshIndex> load(VectorStore store, std::istream& in);

    std::size_t words_per_signature() const { return words_; }
    std::span<const std::uint64_t> signature(std::size_t i) const { return {codes_.data() + i * words_, words_}; }
    std::vector<std::uint64_t> encode(std::span<const float> v) const;

protected:
    void save_structure(std::ostream& out) const override;

private:
    LshIndex(VectorStore store, LshParams params, std::vector<float> planes);

    LshParams params_;
    std::size_t words_ = 0;
    std::vector<float> planes_;  // nbits x dim
    std::vector<std::uint64_t> codes_;
};

class RpForestIndex final : public VectorIndex {
public:
    RpForestIndex(VectorStore store, RpForestParams params);
    VectorIndexKind kind() const override { return VectorIndexKind::rp_forest; }
    RankedList search(std::span<const float> query, std::size_t k) const override;

    static std::unique_ptr<RpForestIndex> load(VectorStore store, std::istream& in);

protected:
    void save_structure(std::ostream& out) const override;

private:
    explicit RpForestIndex(VectorStore store, RpForestParams params, bool build);

    // Internal nodes carry a hyperplane normal; leaves carry item ids.
    struct Node {
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t normal_offset = 0;   // into normals_, internal nodes
        std::uint32_t items_begin = 0;     // into leaf_items_, leaves
        std::uint32_t items_end = 0;
        bool is_leaf() const { return left < 0; }
    };

    template <class Rng>
    std::int32_t build_node(std::vector<std::uint32_t>& items, Rng& rng);

    double margin(const Node& node, std::span<const float> v) const;

    RpForestParams params_;
    std::vector<Node> nodes_;
    std::vector<std::int32_t> roots_;
    std::vector<float> normals_;
    std::vector<std::uint32_t> leaf_items_;
};

} // namespace commitlink::retrieval::detail
