#pragma once

// Reference real-valued boosting loop written from the published algorithm,
// run over stumps produced by a caller-supplied learner. Returns the weight
// vector after each round.

#include <cmath>
#include <functional>
#include <algorithm>
#include <limits>
#include <set>
#include <vector>

namespace oracle {

// learner(weights) -> per-sample class probability rows (K entries each)
using StumpProba = std::function<std::vector<std::vector<double>>(const std::vector<double>&)>;

inline std::vector<std::vector<double>> samme_r_weights(const std::vector<int>& y, int K, int rounds,
                                                        const StumpProba& learner) {
    const std::size_t n = y.size();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<std::vector<double>> history;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int m = 0; m < rounds; ++m) {
        auto proba = learner(w);
        bool perfect = true;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t arg = 0;
            for (std::size_t k = 1; k < proba[i].size(); ++k)
                if (proba[i][k] > proba[i][arg]) arg = k;
            if (static_cast<int>(arg) != y[i]) perfect = false;
        }
        if (perfect) {
            history.push_back(w);
            break;
        }
        if (m < rounds - 1) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (int k = 0; k < K; ++k) {
                    const double code = k == y[i] ? 1.0 : -1.0 / (K - 1);
                    s += code * std::log(std::max(proba[i][static_cast<std::size_t>(k)], eps));
                }
                w[i] *= std::exp(-(K - 1.0) / K * s);
            }
            double total = 0.0;
            for (double v : w) total += v;
            for (double& v : w) v /= total;
        }
        history.push_back(w);
    }
    return history;
}

}  // namespace oracle

namespace oracle {

// Weighted depth-1 Gini split found by trying every (feature, midpoint);
// earlier candidates win exact ties. Returns leaf class frequencies per
// sample over the K label codes 0..K-1.
inline StumpProba weighted_stump(const std::vector<std::vector<double>>& X, const std::vector<int>& y, int K) {
    return [X, y, K](const std::vector<double>& w) {
        const std::size_t n = y.size();
        auto hist = [&](auto&& member) {
            std::vector<double> h(static_cast<std::size_t>(K), 0.0);
            for (std::size_t i = 0; i < n; ++i)
                if (member(i)) h[static_cast<std::size_t>(y[i])] += w[i];
            return h;
        };
        auto gini = [](const std::vector<double>& h) {
            double t = 0.0, s = 0.0;
            for (double v : h) t += v;
            if (t <= 0.0) return 0.0;
            for (double v : h) s += (v / t) * (v / t);
            return 1.0 - s;
        };
        auto total = [](const std::vector<double>& h) {
            double t = 0.0;
            for (double v : h) t += v;
            return t;
        };
        const auto root = hist([](std::size_t) { return true; });
        int classes_present = 0;
        for (double v : root) classes_present += v > 0.0;

        bool found = false;
        double best = 0.0, best_t = 0.0;
        std::size_t best_f = 0;
        if (classes_present > 1) {
            for (std::size_t f = 0; f < X.front().size(); ++f) {
                std::set<double> values;
                for (std::size_t i = 0; i < n; ++i) values.insert(X[i][f]);
                std::vector<double> v(values.begin(), values.end());
                for (std::size_t k = 0; k + 1 < v.size(); ++k) {
                    const double t = v[k] + (v[k + 1] - v[k]) / 2.0;
                    const auto l = hist([&](std::size_t i) { return X[i][f] <= t; });
                    const auto r = hist([&](std::size_t i) { return X[i][f] > t; });
                    const double imp = (total(l) * gini(l) + total(r) * gini(r)) / total(root);
                    if (!found || imp < best - 1e-12) {
                        found = true;
                        best = imp;
                        best_f = f;
                        best_t = t;
                    }
                }
            }
        }
        std::vector<std::vector<double>> proba(n);
        const auto left = found ? hist([&](std::size_t i) { return X[i][best_f] <= best_t; }) : root;
        const auto right = found ? hist([&](std::size_t i) { return X[i][best_f] > best_t; }) : root;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& h = (!found || X[i][best_f] <= best_t) ? left : right;
            const double t = total(h);
            std::vector<double> p(static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k)
                p[static_cast<std::size_t>(k)] =
                    std::max(h[static_cast<std::size_t>(k)] / t, std::numeric_limits<double>::epsilon());
            proba[i] = std::move(p);
        }
        return proba;
    };
}

}  // namespace oracle
