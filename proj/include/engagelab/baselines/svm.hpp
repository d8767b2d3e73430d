#pragma once

#include <cstdint>
#include <limits>

#include "engagelab/baselines/common.hpp"

namespace engagelab::baselines {

enum class SvmKernel { Linear };

struct SvmParams {
    double C = 1.0;
    SvmKernel kernel = SvmKernel::Linear;
    int max_epochs = 1000;
    /// Stop once the primal objective moves less than this between epochs.
    double tolerance = 1e-6;
    /// Constant appended to every sample so the bias is learned as a weight.
    double bias_feature = 1.0;
    std::uint64_t seed = 0;
};

/// Outcome of one binary (class vs rest) problem.
struct SvmFitInfo {
    int epochs = 0;
    bool converged = false;
    double objective = 0.0;

    bool operator==(const SvmFitInfo&) const = default;
};

/// One-vs-rest linear SVM. Row k of weights() and bias()(k) belong to classes()[k].
class SvmModel {
public:
    SvmModel() = default;
    SvmModel(Eigen::MatrixXd weights, Eigen::VectorXd bias, std::vector<IcapLabel> classes,
             double C, std::vector<SvmFitInfo> fit_info)
        : weights_(std::move(weights)),
          bias_(std::move(bias)),
          classes_(std::move(classes)),
          C_(C),
          fit_info_(std::move(fit_info)) {}

    const Eigen::MatrixXd& weights() const noexcept { return weights_; }
    const Eigen::VectorXd& bias() const noexcept { return bias_; }
    const std::vector<IcapLabel>& classes() const noexcept { return classes_; }
    double C() const noexcept { return C_; }
    SvmKernel kernel() const noexcept { return SvmKernel::Linear; }
    const std::vector<SvmFitInfo>& fit_info() const noexcept { return fit_info_; }
    Eigen::Index n_features() const noexcept { return weights_.cols(); }

    /// All binary problems reached the tolerance before the epoch cap.
    bool converged() const noexcept {
        for (const auto& f : fit_info_)
            if (!f.converged) return false;
        return true;
    }

    /// Decision value per label code; classes absent from training get -inf.
    template <typename Derived>
    std::array<double, kNumLabels> decision_values(const Eigen::DenseBase<Derived>& x) const {
        std::array<double, kNumLabels> v;
        v.fill(-std::numeric_limits<double>::infinity());
        if (classes_.size() == 1) {
            v[index(classes_.front())] = 0.0;
            return v;
        }
        for (std::size_t k = 0; k < classes_.size(); ++k) {
            const auto r = static_cast<Eigen::Index>(k);
            v[index(classes_[k])] = weights_.row(r).dot(x.derived()) + bias_(r);
        }
        return v;
    }

    template <typename Derived>
    IcapLabel predict_one(const Eigen::DenseBase<Derived>& x) const {
        return argmax_label(decision_values(x));
    }

    bool operator==(const SvmModel& o) const {
        return weights_ == o.weights_ && bias_ == o.bias_ && classes_ == o.classes_ &&
               C_ == o.C_ && fit_info_ == o.fit_info_;
    }

private:
    Eigen::MatrixXd weights_;
    Eigen::VectorXd bias_;
    std::vector<IcapLabel> classes_;
    double C_ = 1.0;
    std::vector<SvmFitInfo> fit_info_;
};

/// Minimises 1/2 |w|^2 + C * sum hinge(y_i (w.x_i + b)) per class by dual
/// coordinate descent, visiting samples in a seeded order each epoch.
/// Hitting max_epochs is reported in fit_info(), not thrown.
SvmModel train_svm(const Eigen::Ref<const FeatureMatrix>& X, std::span<const IcapLabel> y,
                   const SvmParams& params = {});

}  // namespace engagelab::baselines
