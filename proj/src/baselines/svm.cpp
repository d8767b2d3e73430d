#include "engagelab/baselines/svm.hpp"

#include <cmath>
#include <numeric>

#include "engagelab/rng.hpp"

namespace engagelab::baselines {

namespace {

struct BinaryFit {
    Eigen::VectorXd w;
    double b = 0.0;
    SvmFitInfo info;
};

double primal_objective(const Eigen::Ref<const FeatureMatrix>& X, const Eigen::VectorXd& sign,
                        const Eigen::VectorXd& w, double b, double bias_feature, double C) {
    const Eigen::VectorXd margins = sign.cwiseProduct((X * w).array().matrix() +
                                                      Eigen::VectorXd::Constant(X.rows(), b * bias_feature));
    const double hinge = (1.0 - margins.array()).max(0.0).sum();
    return 0.5 * (w.squaredNorm() + b * b) + C * hinge;
}

// Dual coordinate descent for the L1-loss SVM with the bias folded into the
// weight vector through a constant feature.
BinaryFit fit_binary(const Eigen::Ref<const FeatureMatrix>& X, const Eigen::VectorXd& sign,
                     const SvmParams& params, std::uint64_t seed) {
    const auto n = X.rows();
    const double B = params.bias_feature;
    const double C = params.C;

    BinaryFit fit;
    fit.w = Eigen::VectorXd::Zero(X.cols());
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd diag = X.rowwise().squaredNorm().array() + B * B;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(seed);

    double previous = primal_objective(X, sign, fit.w, fit.b, B, C);
    for (int epoch = 1; epoch <= params.max_epochs; ++epoch) {
        rng.shuffle(std::span(order));
        double max_violation = 0.0;
        for (auto i : order) {
            if (diag(i) <= 0.0) continue;
            const double g = sign(i) * (X.row(i).dot(fit.w) + fit.b * B) - 1.0;
            double pg = g;
            if (alpha(i) <= 0.0)
                pg = std::min(g, 0.0);
            else if (alpha(i) >= C)
                pg = std::max(g, 0.0);
            max_violation = std::max(max_violation, std::abs(pg));
            if (std::abs(pg) <= 1e-12) continue;
            const double old = alpha(i);
            alpha(i) = std::clamp(old - g / diag(i), 0.0, C);
            const double step = (alpha(i) - old) * sign(i);
            fit.w.noalias() += step * X.row(i).transpose();
            fit.b += step * B;
        }
        const double objective = primal_objective(X, sign, fit.w, fit.b, B, C);
        fit.info.epochs = epoch;
        fit.info.objective = objective;
        if (std::abs(previous - objective) < params.tolerance || max_violation <= 1e-12) {
            fit.info.converged = true;
            break;
        }
        previous = objective;
    }
    fit.b *= B;
    return fit;
}

}  // namespace

SvmModel train_svm(const Eigen::Ref<const FeatureMatrix>& X, std::span<const IcapLabel> y,
                   const SvmParams& params) {
    check_training_input(X.rows(), y.size());
    if (!(params.C > 0.0)) throw std::invalid_argument("SVM C must be positive");

    auto classes = present_classes(y);
    const auto K = static_cast<Eigen::Index>(classes.size());
    if (K == 1)
        return SvmModel(Eigen::MatrixXd::Zero(1, X.cols()), Eigen::VectorXd::Zero(1), std::move(classes),
                        params.C, {SvmFitInfo{0, true, 0.0}});

    Eigen::MatrixXd W(K, X.cols());
    Eigen::VectorXd bias(K);
    std::vector<SvmFitInfo> info;
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto target = classes[static_cast<std::size_t>(k)];
        Eigen::VectorXd sign(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            sign(i) = y[static_cast<std::size_t>(i)] == target ? 1.0 : -1.0;
        auto fit = fit_binary(X, sign, params, mix_seed(params.seed, static_cast<std::uint64_t>(code(target))));
        W.row(k) = fit.w.transpose();
        bias(k) = fit.b;
        info.push_back(fit.info);
    }
    return SvmModel(std::move(W), std::move(bias), std::move(classes), params.C, std::move(info));
}

}  // namespace engagelab::baselines
