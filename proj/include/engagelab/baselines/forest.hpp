#pragma once

#include "engagelab/baselines/tree.hpp"

namespace engagelab::baselines {

struct ForestParams {
    int n_estimators = 100;
    bool bootstrap = true;
    /// Features tried per split; ceil(sqrt(d)) when empty.
    std::optional<int> max_features;
    TreeParams tree;  // max_features inside is ignored
};

class ForestModel {
public:
    ForestModel() = default;
    ForestModel(std::vector<TreeModel> trees, int feature_subsample,
                std::vector<std::uint64_t> bootstrap_seeds, Eigen::Index n_features)
        : trees_(std::move(trees)),
          feature_subsample_(feature_subsample),
          bootstrap_seeds_(std::move(bootstrap_seeds)),
          n_features_(n_features) {}

    const std::vector<TreeModel>& trees() const noexcept { return trees_; }
    int feature_subsample() const noexcept { return feature_subsample_; }
    const std::vector<std::uint64_t>& bootstrap_seeds() const noexcept { return bootstrap_seeds_; }
    Eigen::Index n_features() const noexcept { return n_features_; }

    template <typename Derived>
    std::array<int, kNumLabels> votes(const Eigen::DenseBase<Derived>& x) const {
        std::array<int, kNumLabels> v{};
        for (const auto& t : trees_) ++v[index(t.predict_one(x))];
        return v;
    }

    /// Majority vote, lowest label code on ties.
    template <typename Derived>
    IcapLabel predict_one(const Eigen::DenseBase<Derived>& x) const {
        return argmax_label(votes(x));
    }

    bool operator==(const ForestModel&) const = default;

private:
    std::vector<TreeModel> trees_;
    int feature_subsample_ = 0;
    std::vector<std::uint64_t> bootstrap_seeds_;
    Eigen::Index n_features_ = 0;
};

/// ceil(sqrt(d)), at least 1.
int sqrt_feature_count(Eigen::Index d);

/// Trees are independent given their pre-assigned seeds, so they are grown on
/// a small thread pool without affecting the result.
ForestModel train_random_forest(const Eigen::Ref<const FeatureMatrix>& X, std::span<const IcapLabel> y,
                                const ForestParams& params, std::uint64_t seed);

}  // namespace engagelab::baselines
