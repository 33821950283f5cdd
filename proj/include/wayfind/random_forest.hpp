#pragma once

#include "wayfind/dataset.hpp"
#include "wayfind/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wayfind {

struct ForestParams {
    int n_trees = 5;
    int max_depth = 15;
    std::optional<int> mtry; ///< unset: ceil(sqrt(n_features))
    std::uint64_t seed = 0;
    int min_samples_split = 2;
    bool bootstrap = true;

    friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Tree node. Internal nodes send x[feature] <= threshold left. Every node
/// keeps the class counts of the training rows that reached it.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int depth = 0;
    std::vector<std::pair<int, int>> class_counts; ///< (class, count), ascending class

    bool is_leaf() const noexcept { return feature < 0; }
    /// Class with the largest count; ties go to the smallest class code.
    int majority() const;

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Flat binary tree; nodes[0] is the root.
struct DecisionTree {
    std::vector<TreeNode> nodes;

    const TreeNode& leaf_for(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return leaf_for(x).majority(); }
    std::size_t internal_count() const;
    int depth() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct TreeConfig {
    int max_depth = 15;
    int mtry = 1;
    int min_samples_split = 2;
};

/// CART growth on the given rows (duplicates allowed). At each node the
/// features are visited in an order drawn from `rng` and the first `mtry`
/// non-constant ones are searched for the best Gini split over midpoints of
/// consecutive distinct values. Stops at purity, max_depth, fewer than
/// min_samples_split rows, or when every feature is constant.
DecisionTree train_tree(const FeatureMatrix& data, std::span<const std::size_t> rows, const TreeConfig& cfg,
                        RandomStream& rng);

struct RandomForestModel {
    std::vector<DecisionTree> trees;
    ForestParams params;
    int n_classes = 0;
    std::vector<std::string> feature_names;

    std::size_t n_features() const noexcept { return feature_names.size(); }
};

int resolve_mtry(const ForestParams& params, std::size_t n_features);

/// Trains each tree on a bootstrap resample drawn from the stream
/// derive_seed(seed, tree index); the result does not depend on `jobs`.
RandomForestModel rf_train(const Dataset& train, const ForestParams& params, int jobs = 1);

/// Per-tree leaf-majority votes.
std::vector<int> rf_votes(const RandomForestModel& model, std::span<const double> x);

/// Modal vote, ties to the smallest class code. Throws Error when the
/// feature length does not match the model.
int rf_predict(const RandomForestModel& model, std::span<const double> x);

/// Number of internal nodes splitting on each feature, summed over trees,
/// in feature order.
std::vector<std::pair<std::string, std::size_t>> feature_importance_fscore(const RandomForestModel& model);

/// For each tree, the split features (by name) of internal nodes at depth <
/// `levels`, in breadth-first order.
std::vector<std::vector<std::string>> top_nodes(const RandomForestModel& model, int levels);

} // namespace wayfind
