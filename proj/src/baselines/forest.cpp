#include "engagelab/baselines/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace engagelab::baselines {

int sqrt_feature_count(Eigen::Index d) {
    auto k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
    // guard against sqrt rounding just above an exact square
    while (k > 1 && static_cast<Eigen::Index>(k - 1) * (k - 1) >= d) --k;
    return std::max(1, k);
}

ForestModel train_random_forest(const Eigen::Ref<const FeatureMatrix>& X, std::span<const IcapLabel> y,
                                const ForestParams& params, std::uint64_t seed) {
    check_training_input(X.rows(), y.size());
    if (params.n_estimators < 1) throw std::invalid_argument("forest needs at least one tree");

    const auto n = static_cast<std::size_t>(X.rows());
    const int k = params.max_features ? *params.max_features : sqrt_feature_count(X.cols());
    TreeParams tree_params = params.tree;
    tree_params.max_features = k;

    const auto n_trees = static_cast<std::size_t>(params.n_estimators);
    std::vector<std::uint64_t> seeds(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) seeds[t] = mix_seed(seed, t);

    std::vector<TreeModel> trees(n_trees);
    auto build = [&](std::size_t t) {
        Rng rng(seeds[t]);
        std::vector<double> w(n, 0.0);
        if (params.bootstrap) {
            for (std::size_t draw = 0; draw < n; ++draw) w[rng.below(n)] += 1.0;
        } else {
            std::fill(w.begin(), w.end(), 1.0);
        }
        trees[t] = grow_tree(X, y, w, tree_params, &rng);
    };

    const auto workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
    if (workers == 1) {
        for (std::size_t t = 0; t < n_trees; ++t) build(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < n_trees; t = next++) {
                    try {
                        build(t);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        pool.clear();
        if (failure) std::rethrow_exception(failure);
    }
    return ForestModel(std::move(trees), k, std::move(seeds), X.cols());
}

}  // namespace engagelab::baselines
