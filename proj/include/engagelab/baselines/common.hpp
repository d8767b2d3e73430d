#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <string>
#include <vector>

#include "engagelab/errors.hpp"
#include "engagelab/label.hpp"
#include "engagelab/textprep.hpp"

namespace engagelab::baselines {

/// Rows are samples, columns are features.
using FeatureMatrix = Eigen::MatrixXd;
using ClassHistogram = std::array<double, kNumLabels>;

/// Stacks sparse TF-IDF rows into a dense sample matrix.
FeatureMatrix to_dense(std::span<const FeatureVector> rows, Eigen::Index dim);

/// Index of the largest entry; the lowest label code wins ties.
template <typename Values>
IcapLabel argmax_label(const Values& values) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < kNumLabels; ++k)
        if (values[k] > values[best]) best = k;
    return static_cast<IcapLabel>(best);
}

inline void check_training_input(Eigen::Index rows, std::size_t labels) {
    if (rows != static_cast<Eigen::Index>(labels))
        throw DimensionMismatch("feature rows (" + std::to_string(rows) + ") and labels (" +
                                std::to_string(labels) + ") differ in length");
    if (rows == 0) throw DimensionMismatch("no training samples");
}

inline void check_feature_dim(Eigen::Index got, Eigen::Index expected) {
    if (got != expected)
        throw DimensionMismatch("model expects " + std::to_string(expected) +
                                " features, input has " + std::to_string(got));
}

/// Labels present in y, ascending by code.
std::vector<IcapLabel> present_classes(std::span<const IcapLabel> y);

}  // namespace engagelab::baselines
