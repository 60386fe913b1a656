#pragma once

#include "driftscope/dataset.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace driftscope {

// Node of a tree over binary features. Rows with feature value 1 go to `high`,
// all others to `low`. Leaves carry the class counts of the training rows that
// reached them.
struct TreeNode {
    int feature = -1;
    int low = -1;
    int high = -1;
    std::array<double, 2> class_counts{0.0, 0.0};
    double fraction = 0.0; // share of training rows reaching this node
    int prediction = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    double positive_rate() const noexcept {
        double n = class_counts[0] + class_counts[1];
        return n > 0.0 ? class_counts[1] / n : 0.0;
    }
};

class DecisionTree {
public:
    DecisionTree() = default;
    DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features, int depth_limit, double lambda);

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::size_t n_features() const noexcept { return n_features_; }
    int depth_limit() const noexcept { return depth_limit_; }
    double lambda() const noexcept { return lambda_; }

    std::size_t leaf_count() const;
    int depth() const;
    std::vector<std::size_t> used_features() const;

    // Index of the leaf an example lands in.
    int leaf_for(std::span<const double> x) const;
    // Class-1 probability: the positive share of the training rows in x's leaf.
    double predict_proba(std::span<const double> x) const { return nodes_[static_cast<std::size_t>(leaf_for(x))].positive_rate(); }
    int predict(std::span<const double> x) const { return nodes_[static_cast<std::size_t>(leaf_for(x))].prediction; }

    // Misclassification rate on data plus lambda per leaf.
    double regularized_loss(const TabularDataset& data) const;

    // Canonical pre-order rendering of the split structure, used to spot duplicates.
    std::string signature() const;

private:
    std::vector<TreeNode> nodes_;
    std::size_t n_features_ = 0;
    int depth_limit_ = 0;
    double lambda_ = 0.0;
};

// Greedy top-down tree on binary features. Splits are picked by information gain
// (ties to the lowest feature index) among a seeded random subset of
// ceil(feature_subsample * available) features. The tree is grown to the depth
// limit and then pruned bottom-up: a subtree is kept only if its regularized loss
// (misclassification rate + lambda * leaves) is strictly below that of a single
// leaf in its place.
DecisionTree fit_greedy_tree(const TabularDataset& data, int depth, double lambda, std::uint64_t seed,
                             double feature_subsample = 1.0);

} // namespace driftscope
