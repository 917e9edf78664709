#include "index_impl.hpp"

#include "commitlink/common/binary_io.hpp"
#include "commitlink/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

namespace commitlink::retrieval::detail {

namespace {

struct FartherFirst {
    template <class C>
    bool operator()(const C& a, const C& b) const {
        return a.distance < b.distance || (a.distance == b.distance && a.node < b.node);
    }
};

struct NearerFirst {
    template <class C>
    bool operator()(const C& a, const C& b) const {
        return a.distance > b.distance || (a.distance == b.distance && a.node > b.node);
    }
};

} // namespace

HnswIndex::HnswIndex(VectorStore store, HnswParams params) : HnswIndex(std::move(store), params, true) {}

HnswIndex::HnswIndex(VectorStore store, HnswParams params, bool build)
    : VectorIndex(std::move(store)), params_(params) {
    if (params_.m < 2) {
        throw ConfigError("hnsw: m must be at least 2");
    }
    if (!build) {
        return;
    }
    const auto n = store_.size();
    links_.resize(n);
    std::mt19937_64 rng(params_.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double level_mult = 1.0 / std::log(static_cast<double>(params_.m));
    std::vector<std::uint32_t> visited(n, 0);
    std::uint32_t epoch = 0;
    for (std::uint32_t node = 0; node < n; ++node) {
        const double u = 1.0 - unit(rng);  // (0, 1]
        const int level = static_cast<int>(std::floor(-std::log(u) * level_mult));
        insert(node, level, visited, epoch);
    }
}

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(std::span<const float> query, std::vector<Candidate> entry,
                                                          std::size_t ef, std::size_t level,
                                                          std::vector<std::uint32_t>& visited,
                                                          std::uint32_t& epoch) const {
    if (++epoch == 0) {
        std::fill(visited.begin(), visited.end(), 0);
        epoch = 1;
    }
    std::priority_queue<Candidate, std::vector<Candidate>, NearerFirst> frontier;
    std::priority_queue<Candidate, std::vector<Candidate>, FartherFirst> best;
    for (const auto& e : entry) {
        if (visited[e.node] == epoch) {
            continue;
        }
        visited[e.node] = epoch;
        frontier.push(e);
        best.push(e);
        if (best.size() > ef) {
            best.pop();
        }
    }
    while (!frontier.empty()) {
        const auto current = frontier.top();
        if (best.size() >= ef && current.distance > best.top().distance) {
            break;
        }
        frontier.pop();
        for (const auto next : links_[current.node][level]) {
            if (visited[next] == epoch) {
                continue;
            }
            visited[next] = epoch;
            const double d = distance(next, query);
            if (best.size() < ef || d < best.top().distance) {
                frontier.push({d, next});
                best.push({d, next});
                if (best.size() > ef) {
                    best.pop();
                }
            }
        }
    }
    std::vector<Candidate> out;
    out.reserve(best.size());
    while (!best.empty()) {
        out.push_back(best.top());
        best.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

// Keeps a candidate only if it is closer to the base than to every neighbour
// already kept, which spreads links across directions.
std::vector<std::uint32_t> HnswIndex::select_neighbors(std::vector<Candidate> candidates, std::size_t m) const {
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.node < b.node);
    });
    std::vector<std::uint32_t> kept;
    for (const auto& c : candidates) {
        if (kept.size() >= m) {
            break;
        }
        bool diverse = true;
        for (const auto k : kept) {
            if (1.0 - dot(store_.row(c.node), store_.row(k)) < c.distance) {
                diverse = false;
                break;
            }
        }
        if (diverse) {
            kept.push_back(c.node);
        }
    }
    return kept;
}

void HnswIndex::insert(std::uint32_t node, int level, std::vector<std::uint32_t>& visited, std::uint32_t& epoch) {
    links_[node].resize(static_cast<std::size_t>(level) + 1);
    if (max_level_ < 0) {
        entry_point_ = node;
        max_level_ = level;
        return;
    }
    const auto query = store_.row(node);
    Candidate ep{distance(entry_point_, query), entry_point_};
    for (int lc = max_level_; lc > level; --lc) {
        for (bool moved = true; moved;) {
            moved = false;
            for (const auto next : links_[ep.node][static_cast<std::size_t>(lc)]) {
                const double d = distance(next, query);
                if (d < ep.distance) {
                    ep = {d, next};
                    moved = true;
                }
            }
        }
    }
    std::vector<Candidate> entry{ep};
    for (int lc = std::min(level, max_level_); lc >= 0; --lc) {
        const auto layer = static_cast<std::size_t>(lc);
        auto found = search_layer(query, entry, params_.ef_construction, layer, visited, epoch);
        auto chosen = select_neighbors(found, params_.m);
        links_[node][layer] = chosen;
        for (const auto other : chosen) {
            auto& back = links_[other][layer];
            back.push_back(node);
            if (back.size() > max_links(layer)) {
                std::vector<Candidate> pool;
                pool.reserve(back.size());
                for (const auto b : back) {
                    pool.push_back({1.0 - dot(store_.row(other), store_.row(b)), b});
                }
                back = select_neighbors(std::move(pool), max_links(layer));
            }
        }
        entry = std::move(found);
    }
    if (level > max_level_) {
        max_level_ = level;
        entry_point_ = node;
    }
}

RankedList HnswIndex::search(std::span<const float> query, std::size_t k) const {
    check_query(query);
    if (store_.size() == 0 || k == 0) {
        return rank_candidates({}, query, k);
    }
    if (k >= store_.size()) {
        std::vector<std::uint32_t> all(store_.size());
        std::iota(all.begin(), all.end(), 0u);
        return rank_candidates(all, query, k);
    }
    Candidate ep{distance(entry_point_, query), entry_point_};
    for (int lc = max_level_; lc > 0; --lc) {
        for (bool moved = true; moved;) {
            moved = false;
            for (const auto next : links_[ep.node][static_cast<std::size_t>(lc)]) {
                const double d = distance(next, query);
                if (d < ep.distance) {
                    ep = {d, next};
                    moved = true;
                }
            }
        }
    }
    std::vector<std::uint32_t> visited(store_.size(), 0);
    std::uint32_t epoch = 0;
    const auto found = search_layer(query, {ep}, std::max(params_.ef_search, k), 0, visited, epoch);
    std::vector<std::uint32_t> candidates;
    candidates.reserve(found.size());
    for (const auto& c : found) {
        candidates.push_back(c.node);
    }
    return rank_candidates(candidates, query, k);
}

void HnswIndex::save_structure(std::ostream& out) const {
    binio::write<std::uint64_t>(out, params_.m);
    binio::write<std::uint64_t>(out, params_.ef_construction);
    binio::write<std::uint64_t>(out, params_.ef_search);
    binio::write<std::uint64_t>(out, params_.seed);
    binio::write<std::uint32_t>(out, entry_point_);
    binio::write<std::int32_t>(out, max_level_);
    for (const auto& levels : links_) {
        binio::write<std::uint32_t>(out, static_cast<std::uint32_t>(levels.size()));
        for (const auto& l : levels) {
            binio::write_vector(out, l);
        }
    }
}

std::unique_ptr<HnswIndex> HnswIndex::load(VectorStore store, std::istream& in) {
    HnswParams params;
    params.m = binio::read<std::uint64_t>(in);
    params.ef_construction = binio::read<std::uint64_t>(in);
    params.ef_search = binio::read<std::uint64_t>(in);
    params.seed = binio::read<std::uint64_t>(in);
    const auto n = store.size();
    std::unique_ptr<HnswIndex> index(new HnswIndex(std::move(store), params, false));
    index->entry_point_ = binio::read<std::uint32_t>(in);
    index->max_level_ = binio::read<std::int32_t>(in);
    index->links_.resize(n);
    for (auto& levels : index->links_) {
        levels.resize(binio::read<std::uint32_t>(in));
        for (auto& l : levels) {
            l = binio::read_vector<std::uint32_t>(in);
            for (const auto v : l) {
                if (v >= n) {
                    throw DataError("corrupt hnsw index: neighbour out of range");
                }
            }
        }
    }
    if (n > 0 && index->entry_point_ >= n) {
        throw DataError("corrupt hnsw index: bad entry point");
    }
    return index;
}

} // namespace commitlink::retrieval::detail
