#pragma once

#include <cstdint>
#include <optional>

#include "engagelab/baselines/common.hpp"
#include "engagelab/rng.hpp"

namespace engagelab::baselines {

struct TreeParams {
    std::optional<int> max_depth;  // unlimited when empty
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    /// Features examined per split; all of them when empty.
    std::optional<int> max_features;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    /// Weighted class totals of the training samples reaching this node.
    ClassHistogram histogram{};
    /// Distinct training rows reaching this node.
    Eigen::Index n_samples = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

/// CART tree stored as a flat preorder node array; node 0 is the root.
/// Samples with x[feature] <= threshold go left.
class TreeModel {
public:
    TreeModel() = default;
    TreeModel(std::vector<TreeNode> nodes, Eigen::Index n_features)
        : nodes_(std::move(nodes)), n_features_(n_features) {}

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    Eigen::Index n_features() const noexcept { return n_features_; }
    int depth() const;
    std::size_t leaf_count() const;

    template <typename Derived>
    const TreeNode& leaf_for(const Eigen::DenseBase<Derived>& x) const {
        const TreeNode* node = &nodes_.front();
        while (!node->is_leaf())
            node = &nodes_[static_cast<std::size_t>(x(node->feature) <= node->threshold ? node->left
                                                                                         : node->right)];
        return *node;
    }

    template <typename Derived>
    IcapLabel predict_one(const Eigen::DenseBase<Derived>& x) const {
        return argmax_label(leaf_for(x).histogram);
    }

    bool operator==(const TreeModel&) const = default;

private:
    std::vector<TreeNode> nodes_;
    Eigen::Index n_features_ = 0;
};

/// Gini impurity of a weighted class histogram.
double gini(const ClassHistogram& h);

TreeModel train_decision_tree(const Eigen::Ref<const FeatureMatrix>& X, std::span<const IcapLabel> y,
                              const TreeParams& params = {});

/// Weighted growth used by the ensembles. Rows with zero weight are ignored;
/// `feature_rng` is required when params.max_features is set.
TreeModel grow_tree(const Eigen::Ref<const FeatureMatrix>& X, std::span<const IcapLabel> y,
                    std::span<const double> sample_weight, const TreeParams& params,
                    Rng* feature_rng = nullptr);

}  // namespace engagelab::baselines
