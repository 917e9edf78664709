#include "commitlink/rerank/forest.hpp"

#include "commitlink/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace commitlink::rerank {

namespace {

constexpr double kMinGain = 1e-12;

double gini(double positives, double total) {
    if (total <= 0.0) {
        return 0.0;
    }
    const double p = positives / total;
    return 2.0 * p * (1.0 - p);
}

struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Dataset& data, const ForestParams& params, std::size_t mtry, std::mt19937_64& rng)
        : data_(data), params_(params), mtry_(mtry), rng_(rng) {}

    Tree build(std::vector<std::uint32_t> samples) {
        grow(samples, 0);
        return std::move(tree_);
    }

private:
    std::int32_t grow(std::vector<std::uint32_t>& samples, std::size_t depth) {
        const auto index = static_cast<std::int32_t>(tree_.size());
        tree_.emplace_back();
        std::size_t positives = 0;
        for (const auto s : samples) {
            positives += data_.labels[s];
        }
        const double n = static_cast<double>(samples.size());
        tree_[index].value = n == 0.0 ? 0.0 : static_cast<double>(positives) / n;

        const bool pure = positives == 0 || positives == samples.size();
        const bool depth_capped = params_.max_depth != 0 && depth >= params_.max_depth;
        if (pure || depth_capped || samples.size() < 2 * params_.min_samples_leaf) {
            return index;
        }
        const auto split = best_split(samples, static_cast<double>(positives));
        if (split.feature < 0) {
            return index;
        }
        std::vector<std::uint32_t> left, right;
        for (const auto s : samples) {
            (data_.row(s)[static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(s);
        }
        samples.clear();
        samples.shrink_to_fit();
        tree_[index].feature = split.feature;
        tree_[index].threshold = split.threshold;
        const auto l = grow(left, depth + 1);
        const auto r = grow(right, depth + 1);
        tree_[index].left = l;
        tree_[index].right = r;
        return index;
    }

    // Features are visited in random order until mtry non-constant ones have
    // been evaluated; constant features do not use up the budget.
    Split best_split(const std::vector<std::uint32_t>& samples, double positives) {
        std::vector<std::size_t> order(data_.n_features);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng_);

        const double n = static_cast<double>(samples.size());
        const double parent = gini(positives, n);
        const std::size_t min_leaf = params_.min_samples_leaf;
        Split best;
        std::size_t evaluated = 0;
        std::vector<std::pair<double, std::uint8_t>> column(samples.size());
        for (const auto feature : order) {
            if (evaluated >= mtry_) {
                break;
            }
            for (std::size_t i = 0; i < samples.size(); ++i) {
                column[i] = {data_.row(samples[i])[feature], data_.labels[samples[i]]};
            }
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) {
                continue;
            }
            ++evaluated;
            double left_pos = 0.0;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                left_pos += column[i].second;
                if (column[i].first == column[i + 1].first) {
                    continue;
                }
                const auto nl = i + 1;
                const auto nr = column.size() - nl;
                if (nl < min_leaf || nr < min_leaf) {
                    continue;
                }
                const double wl = static_cast<double>(nl);
                const double wr = static_cast<double>(nr);
                const double child = (wl * gini(left_pos, wl) + wr * gini(positives - left_pos, wr)) / n;
                const double gain = parent - child;
                if (gain > kMinGain && gain > best.gain) {
                    double threshold = 0.5 * (column[i].first + column[i + 1].first);
                    if (!(threshold < column[i + 1].first)) {
                        threshold = column[i].first;
                    }
                    best = {static_cast<std::int32_t>(feature), threshold, gain};
                }
            }
        }
        return best;
    }

    const Dataset& data_;
    const ForestParams& params_;
    std::size_t mtry_;
    std::mt19937_64& rng_;
    Tree tree_;
};

double tree_score(const Tree& tree, std::span<const double> x) {
    std::size_t node = 0;
    while (!tree[node].is_leaf()) {
        const auto& t = tree[node];
        node = static_cast<std::size_t>(x[static_cast<std::size_t>(t.feature)] <= t.threshold ? t.left : t.right);
    }
    return tree[node].value;
}

} // namespace

void Dataset::add(std::span<const double> features, bool positive) {
    if (labels.empty() && n_features == 0) {
        n_features = features.size();
    }
    if (features.size() != n_features) {
        throw DataError("dataset row has " + std::to_string(features.size()) + " features, expected " +
                        std::to_string(n_features));
    }
    values.insert(values.end(), features.begin(), features.end());
    labels.push_back(positive ? 1 : 0);
}

void to_json(nlohmann::json& j, const ForestParams& p) {
    j = nlohmann::json{{"n_trees", p.n_trees},
                       {"max_depth", p.max_depth},
                       {"min_samples_leaf", p.min_samples_leaf},
                       {"features_per_split", p.features_per_split},
                       {"bootstrap", p.bootstrap},
                       {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, ForestParams& p) {
    p = ForestParams{};
    for (const auto& [key, value] : j.items()) {
        if (key == "n_trees") {
            p.n_trees = value.get<std::size_t>();
        } else if (key == "max_depth") {
            p.max_depth = value.get<std::size_t>();
        } else if (key == "min_samples_leaf") {
            p.min_samples_leaf = value.get<std::size_t>();
        } else if (key == "features_per_split") {
            p.features_per_split = value.get<std::size_t>();
        } else if (key == "bootstrap") {
            p.bootstrap = value.get<bool>();
        } else if (key == "seed") {
            p.seed = value.get<std::uint64_t>();
        } else {
            throw ConfigError("unknown forest parameter '" + key + "'");
        }
    }
    if (p.n_trees == 0 || p.min_samples_leaf == 0) {
        throw ConfigError("forest needs n_trees >= 1 and min_samples_leaf >= 1");
    }
}

ForestModel ForestModel::train(const Dataset& data, const ForestParams& params, int feature_schema_version,
                               TrainReport* report) {
    if (data.size() == 0 || data.n_features == 0) {
        throw DataError("cannot train a forest on an empty dataset");
    }
    const auto positives = static_cast<std::size_t>(std::count(data.labels.begin(), data.labels.end(), 1));
    if (positives == 0 || positives == data.size()) {
        throw DataError("cannot train a forest on single-class data (" + std::to_string(positives) + " positives of " +
                        std::to_string(data.size()) + ")");
    }
    ForestModel model;
    model.params_ = params;
    model.n_features_ = data.n_features;
    model.schema_version_ = feature_schema_version;
    const auto mtry = params.features_per_split != 0
                          ? std::min(params.features_per_split, data.n_features)
                          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(data.n_features))));
    model.trees_.reserve(params.n_trees);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
        std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                          static_cast<std::uint32_t>(t)};
        std::mt19937_64 rng(seq);
        std::vector<std::uint32_t> samples(data.size());
        if (params.bootstrap) {
            std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(data.size() - 1));
            for (auto& s : samples) {
                s = pick(rng);
            }
            std::sort(samples.begin(), samples.end());
        } else {
            std::iota(samples.begin(), samples.end(), 0u);
        }
        model.trees_.push_back(TreeBuilder(data, params, mtry, rng).build(std::move(samples)));
    }
    if (report != nullptr) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            correct += (model.score(data.row(i)) >= 0.5) == (data.labels[i] == 1);
        }
        report->examples = data.size();
        report->positives = positives;
        report->in_bag_accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    }
    return model;
}

double ForestModel::score(std::span<const double> features) const {
    if (features.size() != n_features_) {
        throw DataError("feature vector has " + std::to_string(features.size()) + " values, model expects " +
                        std::to_string(n_features_));
    }
    if (trees_.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& tree : trees_) {
        sum += tree_score(tree, features);
    }
    return sum / static_cast<double>(trees_.size());
}

void ForestModel::validate() const {
    for (const auto& tree : trees_) {
        if (tree.empty()) {
            throw DataError("forest model contains an empty tree");
        }
        const auto size = static_cast<std::int32_t>(tree.size());
        for (std::int32_t i = 0; i < size; ++i) {
            const auto& node = tree[static_cast<std::size_t>(i)];
            if (node.is_leaf()) {
                if (!(node.value >= 0.0 && node.value <= 1.0)) {
                    throw DataError("forest leaf value outside [0, 1]");
                }
                continue;
            }
            // Children always follow their parent, which also rules out cycles.
            if (static_cast<std::size_t>(node.feature) >= n_features_ || node.left <= i || node.right <= i ||
                node.left >= size || node.right >= size || !std::isfinite(node.threshold)) {
                throw DataError("malformed forest node");
            }
        }
    }
}

nlohmann::json ForestModel::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : trees_) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree) {
            if (n.is_leaf()) {
                nodes.push_back({{"value", n.value}});
            } else {
                nodes.push_back(
                    {{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                     {"value", n.value}});
            }
        }
        trees.push_back(std::move(nodes));
    }
    return {{"format_version", kFormatVersion},
            {"feature_schema_version", schema_version_},
            {"n_features", n_features_},
            {"params", params_},
            {"trees", std::move(trees)}};
}

ForestModel ForestModel::from_json(const nlohmann::json& j, int expected_schema_version) {
    try {
        const auto format = j.at("format_version").get<int>();
        if (format != kFormatVersion) {
            throw DataError("unsupported forest format version " + std::to_string(format));
        }
        const auto schema = j.at("feature_schema_version").get<int>();
        if (schema != expected_schema_version) {
            throw DataError("forest was trained on feature schema v" + std::to_string(schema) + ", expected v" +
                            std::to_string(expected_schema_version));
        }
        std::vector<Tree> trees;
        for (const auto& jt : j.at("trees")) {
            Tree tree;
            for (const auto& jn : jt) {
                TreeNode n;
                n.value = jn.at("value").get<double>();
                if (jn.contains("feature")) {
                    n.feature = jn.at("feature").get<std::int32_t>();
                    n.threshold = jn.at("threshold").get<double>();
                    n.left = jn.at("left").get<std::int32_t>();
                    n.right = jn.at("right").get<std::int32_t>();
                    if (n.feature < 0) {
                        throw DataError("malformed forest node");
                    }
                }
                tree.push_back(n);
            }
            trees.push_back(std::move(tree));
        }
        return from_trees(std::move(trees), j.at("n_features").get<std::size_t>(), schema,
                          j.at("params").get<ForestParams>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed forest model: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("malformed forest model: ") + e.what());
    }
}

ForestModel ForestModel::from_trees(std::vector<Tree> trees, std::size_t n_features, int feature_schema_version,
                                    ForestParams params) {
    ForestModel model;
    model.params_ = params;
    model.n_features_ = n_features;
    model.schema_version_ = feature_schema_version;
    model.trees_ = std::move(trees);
    model.validate();
    return model;
}

} // namespace commitlink::rerank
