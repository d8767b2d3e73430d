#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "engagelab/label.hpp"
#include "engagelab/rng.hpp"

namespace testsupport {

struct ToySet {
    Eigen::MatrixXd X;
    std::vector<engagelab::IcapLabel> y;
};

/// Three well-separated blobs at 0, 120 and 240 degrees on a circle of
/// radius 4, jitter at most 0.5, so every class is linearly separable from
/// the other two. Each class gets at least one point.
inline ToySet separable_toy_set(std::uint64_t seed, int n_points) {
    engagelab::Rng rng(seed);
    ToySet s;
    s.X.resize(n_points, 2);
    for (int i = 0; i < n_points; ++i) {
        const int c = i < 3 ? i : static_cast<int>(rng.below(3));
        const double angle = 2.0 * std::numbers::pi * c / 3.0;
        s.X(i, 0) = 4.0 * std::cos(angle) + (rng.uniform() - 0.5);
        s.X(i, 1) = 4.0 * std::sin(angle) + (rng.uniform() - 0.5);
        s.y.push_back(static_cast<engagelab::IcapLabel>(c));
    }
    return s;
}

/// Small integer grid points with random labels; plenty of equal values,
/// so tie-breaking is exercised.
inline ToySet grid_toy_set(std::uint64_t seed, int n_points) {
    engagelab::Rng rng(seed);
    ToySet s;
    s.X.resize(n_points, 2);
    for (int i = 0; i < n_points; ++i) {
        s.X(i, 0) = static_cast<double>(rng.below(4));
        s.X(i, 1) = static_cast<double>(rng.below(4));
        s.y.push_back(static_cast<engagelab::IcapLabel>(rng.below(3)));
    }
    return s;
}

}  // namespace testsupport
