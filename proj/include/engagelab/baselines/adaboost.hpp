#pragma once

#include <limits>

#include "engagelab/baselines/tree.hpp"

namespace engagelab::baselines {

struct AdaBoostParams {
    int n_estimators = 50;
    double learning_rate = 1.0;
};

/// Real-valued multi-class boosting (SAMME.R) over depth-1 trees. Each stage
/// contributes (K-1) * (log p_k(x) - mean_j log p_j(x)), where p are the
/// stump's leaf class frequencies over the K classes seen in training.
class AdaBoostModel {
public:
    AdaBoostModel() = default;
    AdaBoostModel(std::vector<TreeModel> stumps, std::vector<IcapLabel> classes,
                  double learning_rate, Eigen::Index n_features)
        : stumps_(std::move(stumps)),
          classes_(std::move(classes)),
          learning_rate_(learning_rate),
          n_features_(n_features) {}

    const std::vector<TreeModel>& stumps() const noexcept { return stumps_; }
    const std::vector<IcapLabel>& classes() const noexcept { return classes_; }
    double learning_rate() const noexcept { return learning_rate_; }
    Eigen::Index n_features() const noexcept { return n_features_; }
    std::size_t n_classes() const noexcept { return classes_.size(); }

    /// Per-stage probability floor (double epsilon), as in the reference algorithm.
    static constexpr double kProbaFloor = std::numeric_limits<double>::epsilon();

    /// Clipped leaf class probabilities of one stump, over classes().
    template <typename Derived>
    Eigen::VectorXd stump_proba(const TreeModel& stump, const Eigen::DenseBase<Derived>& x) const {
        const auto& h = stump.leaf_for(x).histogram;
        Eigen::VectorXd p(static_cast<Eigen::Index>(classes_.size()));
        double total = 0.0;
        for (std::size_t k = 0; k < classes_.size(); ++k) total += h[index(classes_[k])];
        for (std::size_t k = 0; k < classes_.size(); ++k)
            p(static_cast<Eigen::Index>(k)) = std::max(h[index(classes_[k])] / total, kProbaFloor);
        return p;
    }

    /// Averaged stage contributions over classes(); uses the first
    /// `n_stages` stages (all when larger than the model).
    template <typename Derived>
    Eigen::VectorXd decision_function(const Eigen::DenseBase<Derived>& x,
                                      std::size_t n_stages = SIZE_MAX) const {
        const auto K = static_cast<Eigen::Index>(classes_.size());
        Eigen::VectorXd total = Eigen::VectorXd::Zero(K);
        if (K < 2) return total;
        const auto used = std::min(n_stages, stumps_.size());
        for (std::size_t s = 0; s < used; ++s) {
            const Eigen::ArrayXd logp = stump_proba(stumps_[s], x).array().log();
            total.array() += static_cast<double>(K - 1) * (logp - logp.mean());
        }
        if (used > 0) total /= static_cast<double>(used);
        return total;
    }

    template <typename Derived>
    IcapLabel predict_one(const Eigen::DenseBase<Derived>& x, std::size_t n_stages = SIZE_MAX) const {
        if (classes_.size() == 1) return classes_.front();
        const auto d = decision_function(x, n_stages);
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < d.size(); ++k)
            if (d(k) > d(best)) best = k;
        return classes_[static_cast<std::size_t>(best)];
    }

    bool operator==(const AdaBoostModel&) const = default;

private:
    std::vector<TreeModel> stumps_;
    std::vector<IcapLabel> classes_;
    double learning_rate_ = 1.0;
    Eigen::Index n_features_ = 0;
};

/// Per-round diagnostics, filled when requested.
struct AdaBoostTrace {
    std::vector<double> stage_errors;
    /// Sample-weight totals after each completed round's renormalisation.
    std::vector<double> weight_sums;
    /// Sample weights in force after each round.
    std::vector<Eigen::VectorXd> sample_weights;
    bool stopped_early = false;
};

AdaBoostModel train_adaboost(const Eigen::Ref<const FeatureMatrix>& X, std::span<const IcapLabel> y,
                             const AdaBoostParams& params = {}, AdaBoostTrace* trace = nullptr);

}  // namespace engagelab::baselines
