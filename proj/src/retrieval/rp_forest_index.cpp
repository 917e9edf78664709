#include "index_impl.hpp"

#include "commitlink/common/binary_io.hpp"
#include "commitlink/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>

namespace commitlink::retrieval::detail {

namespace {

constexpr int kTwoMeansIterations = 5;
constexpr std::size_t kTwoMeansSample = 256;

void normalize_in_place(std::vector<double>& v) {
    double norm = 0.0;
    for (const auto x : v) {
        norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (auto& x : v) {
            x /= norm;
        }
    }
}

} // namespace

RpForestIndex::RpForestIndex(VectorStore store, RpForestParams params)
    : RpForestIndex(std::move(store), params, true) {}

RpForestIndex::RpForestIndex(VectorStore store, RpForestParams params, bool build)
    : VectorIndex(std::move(store)), params_(params) {
    if (params_.n_trees == 0 || params_.leaf_size == 0 || params_.search_k_factor == 0) {
        throw ConfigError("rp_forest: n_trees, leaf_size and search_k_factor must be positive");
    }
    if (!build || store_.size() == 0) {
        return;
    }
    std::mt19937_64 rng(params_.seed);
    for (std::size_t t = 0; t < params_.n_trees; ++t) {
        std::vector<std::uint32_t> items(store_.size());
        std::iota(items.begin(), items.end(), 0u);
        roots_.push_back(build_node(items, rng));
    }
}

double RpForestIndex::margin(const Node& node, std::span<const float> v) const {
    return dot(std::span<const float>(normals_.data() + node.normal_offset, store_.dim()), v);
}

// Split plane through the origin whose normal separates two centroids found
// by a short 2-means run on a sample of the items.
template <class Rng>
std::int32_t RpForestIndex::build_node(std::vector<std::uint32_t>& items, Rng& rng) {
    const auto index = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    if (items.size() <= params_.leaf_size) {
        nodes_[index].items_begin = static_cast<std::uint32_t>(leaf_items_.size());
        leaf_items_.insert(leaf_items_.end(), items.begin(), items.end());
        nodes_[index].items_end = static_cast<std::uint32_t>(leaf_items_.size());
        return index;
    }
    const auto dim = store_.dim();
    std::uniform_int_distribution<std::size_t> pick(0, items.size() - 1);
    const auto a = items[pick(rng)];
    auto b = items[pick(rng)];
    for (int tries = 0; b == a && tries < 8; ++tries) {
        b = items[pick(rng)];
    }
    std::vector<double> c0(store_.row(a).begin(), store_.row(a).end());
    std::vector<double> c1(store_.row(b).begin(), store_.row(b).end());
    for (int it = 0; it < kTwoMeansIterations; ++it) {
        std::vector<double> s0(dim, 0.0), s1(dim, 0.0);
        std::size_t n0 = 0, n1 = 0;
        const auto samples = std::min(kTwoMeansSample, items.size());
        for (std::size_t s = 0; s < samples; ++s) {
            const auto row = store_.row(items[pick(rng)]);
            double d0 = 0.0, d1 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                d0 += row[j] * c0[j];
                d1 += row[j] * c1[j];
            }
            auto& sum = d0 >= d1 ? s0 : s1;
            (d0 >= d1 ? n0 : n1)++;
            for (std::size_t j = 0; j < dim; ++j) {
                sum[j] += row[j];
            }
        }
        if (n0 > 0) {
            c0 = std::move(s0);
            normalize_in_place(c0);
        }
        if (n1 > 0) {
            c1 = std::move(s1);
            normalize_in_place(c1);
        }
    }
    std::vector<double> normal(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        normal[j] = c0[j] - c1[j];
    }
    normalize_in_place(normal);
    const auto offset = static_cast<std::uint32_t>(normals_.size());
    for (const auto x : normal) {
        normals_.push_back(static_cast<float>(x));
    }
    nodes_[index].normal_offset = offset;

    std::vector<std::uint32_t> left, right;
    for (const auto item : items) {
        (margin(nodes_[index], store_.row(item)) > 0.0 ? right : left).push_back(item);
    }
    // Degenerate plane (e.g. duplicate vectors): fall back to a random halving.
    if (left.empty() || right.empty()) {
        left.clear();
        right.clear();
        std::bernoulli_distribution coin(0.5);
        for (const auto item : items) {
            (coin(rng) ? right : left).push_back(item);
        }
        if (left.empty() || right.empty()) {
            left.assign(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(items.size() / 2));
            right.assign(items.begin() + static_cast<std::ptrdiff_t>(items.size() / 2), items.end());
        }
        std::fill(normals_.begin() + offset, normals_.end(), 0.0f);
    }
    items.clear();
    items.shrink_to_fit();
    const auto l = build_node(left, rng);
    const auto r = build_node(right, rng);
    nodes_[index].left = l;
    nodes_[index].right = r;
    return index;
}

RankedList RpForestIndex::search(std::span<const float> query, std::size_t k) const {
    check_query(query);
    if (store_.size() == 0 || k == 0) {
        return rank_candidates({}, query, k);
    }
    if (k >= store_.size()) {
        std::vector<std::uint32_t> all(store_.size());
        std::iota(all.begin(), all.end(), 0u);
        return rank_candidates(all, query, k);
    }
    const auto budget = params_.search_k_factor * k * params_.n_trees;
    std::priority_queue<std::pair<double, std::int32_t>> queue;
    for (const auto root : roots_) {
        queue.push({std::numeric_limits<double>::infinity(), root});
    }
    std::vector<std::uint32_t> candidates;
    while (!queue.empty() && candidates.size() < budget) {
        const auto [priority, id] = queue.top();
        queue.pop();
        const auto& node = nodes_[static_cast<std::size_t>(id)];
        if (node.is_leaf()) {
            candidates.insert(candidates.end(), leaf_items_.begin() + node.items_begin,
                              leaf_items_.begin() + node.items_end);
            continue;
        }
        const double m = margin(node, query);
        queue.push({std::min(priority, m), node.right});
        queue.push({std::min(priority, -m), node.left});
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    return rank_candidates(candidates, query, k);
}

void RpForestIndex::save_structure(std::ostream& out) const {
    binio::write<std::uint64_t>(out, params_.n_trees);
    binio::write<std::uint64_t>(out, params_.leaf_size);
    binio::write<std::uint64_t>(out, params_.search_k_factor);
    binio::write<std::uint64_t>(out, params_.seed);
    binio::write<std::uint64_t>(out, nodes_.size());
    for (const auto& n : nodes_) {
        binio::write(out, n.left);
        binio::write(out, n.right);
        binio::write(out, n.normal_offset);
        binio::write(out, n.items_begin);
        binio::write(out, n.items_end);
    }
    binio::write_vector(out, roots_);
    binio::write_vector(out, normals_);
    binio::write_vector(out, leaf_items_);
}

std::unique_ptr<RpForestIndex> RpForestIndex::load(VectorStore store, std::istream& in) {
    RpForestParams params;
    params.n_trees = binio::read<std::uint64_t>(in);
    params.leaf_size = binio::read<std::uint64_t>(in);
    params.search_k_factor = binio::read<std::uint64_t>(in);
    params.seed = binio::read<std::uint64_t>(in);
    std::unique_ptr<RpForestIndex> index(new RpForestIndex(std::move(store), params, false));
    const auto count = binio::read<std::uint64_t>(in);
    index->nodes_.resize(count);
    for (auto& n : index->nodes_) {
        n.left = binio::read<std::int32_t>(in);
        n.right = binio::read<std::int32_t>(in);
        n.normal_offset = binio::read<std::uint32_t>(in);
        n.items_begin = binio::read<std::uint32_t>(in);
        n.items_end = binio::read<std::uint32_t>(in);
    }
    index->roots_ = binio::read_vector<std::int32_t>(in);
    index->normals_ = binio::read_vector<float>(in);
    index->leaf_items_ = binio::read_vector<std::uint32_t>(in);
    const auto dim = index->store_.dim();
    const auto n_items = index->store_.size();
    for (const auto& n : index->nodes_) {
        const bool bad_children = n.left >= static_cast<std::int64_t>(count) || n.right >= static_cast<std::int64_t>(count);
        const bool bad_leaf = n.is_leaf() && (n.items_begin > n.items_end || n.items_end > index->leaf_items_.size());
        const bool bad_normal = !n.is_leaf() && n.normal_offset + dim > index->normals_.size();
        if (bad_children || bad_leaf || bad_normal) {
            throw DataError("corrupt rp_forest index");
        }
    }
    for (const auto r : index->roots_) {
        if (r < 0 || static_cast<std::uint64_t>(r) >= count) {
            throw DataError("corrupt rp_forest index: bad root");
        }
    }
    for (const auto item : index->leaf_items_) {
        if (item >= n_items) {
            throw DataError("corrupt rp_forest index: item out of range");
        }
    }
    return index;
}

} // namespace commitlink::retrieval::detail
