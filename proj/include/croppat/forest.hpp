#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "croppat/dataset.hpp"

namespace croppat {

struct ForestParams {
    int ntree = 300;
    int mtry = 8;
    int max_depth = 0;      // 0 = unbounded; otherwise maximum split levels
    int min_node_size = 1;  // nodes below this size become leaves
    std::uint64_t seed = 0;

    /// A split is accepted only if it lowers weighted Gini impurity by
    /// more than this margin; otherwise the node becomes a leaf.
    static constexpr double kMinImpurityDecrease = 1e-12;
};

/// Arena node: feature == -1 marks a leaf carrying leaf_class, otherwise a
/// binary split sending x[feature] <= threshold to the left child.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = -1;

    bool operator==(const TreeNode&) const = default;
};

/// CART-style classification tree stored as a preorder node list.
struct Tree {
    std::vector<TreeNode> nodes;

    int route(std::span<const double> x) const;

    bool operator==(const Tree&) const = default;
};

/// Bagged forest with per-node feature subsampling and majority voting.
/// Tree t draws its bootstrap bag and all node randomness from an
/// independent stream derive_seed(seed, t), so concurrent construction is
/// bit-equal to sequential construction.
struct ForestModel {
    std::vector<Tree> trees;
    // Bag multiplicities per tree and training sample; zero means the
    // sample is out-of-bag for that tree.
    std::vector<std::vector<std::uint32_t>> in_bag_counts;
    std::vector<std::string> class_names;
    std::size_t feature_count = 0;
    double oob_error = 0.0;

    static ForestModel fit(const Dataset& train, const ForestParams& params, int jobs = 1);

    /// Per-class vote counts across all trees.
    std::vector<int> votes(std::span<const double> x) const;

    /// Majority vote; ties break to the lowest class index.
    int predict(std::span<const double> x) const;

    bool operator==(const ForestModel&) const = default;
};

/// Out-of-Bag error: each training sample is voted on only by trees whose
/// bag excluded it; returns the misclassified fraction among samples with
/// at least one such tree (samples covered by every bag are skipped).
double oob_error(const ForestModel& m, const Dataset& train);

}  // namespace croppat
