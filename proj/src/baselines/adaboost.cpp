#include "engagelab/baselines/adaboost.hpp"

#include <cmath>
#include <numeric>

namespace engagelab::baselines {

AdaBoostModel train_adaboost(const Eigen::Ref<const FeatureMatrix>& X, std::span<const IcapLabel> y,
                             const AdaBoostParams& params, AdaBoostTrace* trace) {
    check_training_input(X.rows(), y.size());
    if (params.n_estimators < 1) throw std::invalid_argument("boosting needs at least one stage");

    const auto n = y.size();
    auto classes = present_classes(y);
    const auto K = classes.size();
    TreeParams stump_params;
    stump_params.max_depth = 1;

    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<TreeModel> stumps;

    if (K == 1) {
        stumps.push_back(grow_tree(X, y, w, stump_params));
        return AdaBoostModel(std::move(stumps), std::move(classes), params.learning_rate, X.cols());
    }

    std::array<Eigen::Index, kNumLabels> column_of{};
    for (std::size_t k = 0; k < K; ++k) column_of[index(classes[k])] = static_cast<Eigen::Index>(k);
    const double off_target = -1.0 / static_cast<double>(K - 1);
    const double scale = -params.learning_rate * (static_cast<double>(K) - 1.0) / static_cast<double>(K);

    AdaBoostModel partial;
    for (int round = 0; round < params.n_estimators; ++round) {
        stumps.push_back(grow_tree(X, y, w, stump_params));
        partial = AdaBoostModel({stumps.back()}, classes, params.learning_rate, X.cols());

        // weighted error of the stump's argmax prediction
        double err_num = 0.0, err_den = 0.0;
        std::vector<Eigen::VectorXd> proba(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = X.row(static_cast<Eigen::Index>(i));
            proba[i] = partial.stump_proba(stumps.back(), row);
            const auto predicted = stumps.back().predict_one(row);
            if (predicted != y[i]) err_num += w[i];
            err_den += w[i];
        }
        const double error = err_num / err_den;
        if (trace) trace->stage_errors.push_back(error);

        if (error <= 0.0) {
            if (trace) {
                trace->weight_sums.push_back(std::accumulate(w.begin(), w.end(), 0.0));
                trace->sample_weights.emplace_back(Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(n)));
                trace->stopped_early = true;
            }
            break;
        }

        const bool last = round == params.n_estimators - 1;
        if (!last) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t k = 0; k < K; ++k) {
                    const double coding = column_of[index(y[i])] == static_cast<Eigen::Index>(k) ? 1.0 : off_target;
                    s += coding * std::log(proba[i](static_cast<Eigen::Index>(k)));
                }
                const double stage_weight = scale * s;
                if (w[i] > 0.0 || stage_weight < 0.0) w[i] *= std::exp(stage_weight);
            }
        }

        const double sum = std::accumulate(w.begin(), w.end(), 0.0);
        if (!std::isfinite(sum) || sum <= 0.0) {
            if (trace) trace->stopped_early = true;
            break;
        }
        if (!last)
            for (auto& v : w) v /= sum;
        if (trace) {
            trace->weight_sums.push_back(std::accumulate(w.begin(), w.end(), 0.0));
            trace->sample_weights.emplace_back(Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(n)));
        }
    }
    return AdaBoostModel(std::move(stumps), std::move(classes), params.learning_rate, X.cols());
}

}  // namespace engagelab::baselines
