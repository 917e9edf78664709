#pragma once

#include "json.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace commitlink::rerank {

/// Row-major feature matrix with binary labels.
struct Dataset {
    std::size_t n_features = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> labels;  ///< 1 = positive

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * n_features, n_features}; }
    void add(std::span<const double> features, bool positive);
};

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t max_depth = 0;           ///< 0 = unlimited
    std::size_t min_samples_leaf = 1;
    std::size_t features_per_split = 0;  ///< 0 = ceil(sqrt(n_features))
    bool bootstrap = true;
    std::uint64_t seed = 42;

    bool operator==(const ForestParams&) const = default;
};

void to_json(nlohmann::json& j, const ForestParams& params);
void from_json(const nlohmann::json& j, ForestParams& params);

/// Node of a CART tree. Internal nodes send x[feature] <= threshold left;
/// leaves hold the positive fraction of their training samples.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

using Tree = std::vector<TreeNode>;  // root at index 0

struct TrainReport {
    std::size_t examples = 0;
    std::size_t positives = 0;
    double in_bag_accuracy = 0.0;
};

/// Random forest of Gini CART trees; score = mean leaf positive fraction.
class ForestModel {
public:
    static constexpr int kFormatVersion = 1;

    /// Throws DataError when the data holds a single class or is empty.
    static ForestModel train(const Dataset& data, const ForestParams& params, int feature_schema_version,
                             TrainReport* report = nullptr);

    /// In [0, 1]. Throws DataError when the row length differs from the
    /// model's feature count.
    double score(std::span<const double> features) const;

    std::size_t n_features() const { return n_features_; }
    int feature_schema_version() const { return schema_version_; }
    const ForestParams& params() const { return params_; }
    const std::vector<Tree>& trees() const { return trees_; }

    nlohmann::json to_json() const;
    /// Throws DataError on a malformed model, an unknown format version, or a
    /// schema version other than `expected_schema_version`.
    static ForestModel from_json(const nlohmann::json& j, int expected_schema_version);

    /// Assembles a model from explicit trees (validated as in from_json).
    static ForestModel from_trees(std::vector<Tree> trees, std::size_t n_features, int feature_schema_version,
                                  ForestParams params = {});

private:
    void validate() const;

    ForestParams params_;
    std::size_t n_features_ = 0;
    int schema_version_ = 0;
    std::vector<Tree> trees_;
};

} // namespace commitlink::rerank
