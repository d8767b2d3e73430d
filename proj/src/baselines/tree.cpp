#include "engagelab/baselines/tree.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>

namespace engagelab::baselines {

namespace {

constexpr double kImpurityTol = 1e-12;

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted child impurity, normalised by node weight
};

bool better(const SplitChoice& cand, const SplitChoice& best) {
    if (best.feature < 0) return true;
    if (cand.impurity < best.impurity - kImpurityTol) return true;
    if (cand.impurity > best.impurity + kImpurityTol) return false;
    if (cand.feature != best.feature) return cand.feature < best.feature;
    return cand.threshold < best.threshold;
}

class Grower {
public:
    Grower(const Eigen::Ref<const FeatureMatrix>& X, std::span<const IcapLabel> y,
           std::span<const double> w, const TreeParams& params, Rng* rng)
        : X_(X), y_(y), w_(w), params_(params), rng_(rng) {}

    TreeModel run() {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < X_.rows(); ++i)
            if (w_[static_cast<std::size_t>(i)] > 0.0) rows.push_back(i);
        if (rows.empty()) throw DimensionMismatch("all sample weights are zero");
        grow(rows, 0);
        return TreeModel(std::move(nodes_), X_.cols());
    }

private:
    ClassHistogram histogram(std::span<const Eigen::Index> rows) const {
        ClassHistogram h{};
        for (auto i : rows) h[index(y_[static_cast<std::size_t>(i)])] += w_[static_cast<std::size_t>(i)];
        return h;
    }

    int grow(std::vector<Eigen::Index>& rows, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        TreeNode node;
        node.histogram = histogram(rows);
        node.n_samples = static_cast<Eigen::Index>(rows.size());

        const auto nonzero = std::count_if(node.histogram.begin(), node.histogram.end(),
                                           [](double v) { return v > 0.0; });
        const bool stop = nonzero <= 1 ||
                          static_cast<int>(rows.size()) < params_.min_samples_split ||
                          (params_.max_depth && depth >= *params_.max_depth);
        SplitChoice split;
        if (!stop) split = find_split(rows, node.histogram);
        if (split.feature < 0) {
            nodes_[static_cast<std::size_t>(id)] = node;
            return id;
        }

        assert(split.impurity <= gini(node.histogram) + kImpurityTol);
        std::vector<Eigen::Index> left, right;
        for (auto i : rows) (X_(i, split.feature) <= split.threshold ? left : right).push_back(i);
        rows.clear();
        rows.shrink_to_fit();

        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = grow(left, depth + 1);
        node.right = grow(right, depth + 1);
        nodes_[static_cast<std::size_t>(id)] = node;
        return id;
    }

    std::vector<int> candidate_features(std::span<const Eigen::Index> rows) const {
        const int d = static_cast<int>(X_.cols());
        std::vector<int> order(static_cast<std::size_t>(d));
        std::iota(order.begin(), order.end(), 0);
        if (!params_.max_features || *params_.max_features >= d) return order;

        // Constant features do not count toward the budget, so a split is
        // found whenever one exists.
        rng_->shuffle(std::span(order));
        std::vector<int> chosen;
        for (int f : order) {
            if (static_cast<int>(chosen.size()) >= *params_.max_features) break;
            if (!is_constant(rows, f)) chosen.push_back(f);
        }
        return chosen;
    }

    bool is_constant(std::span<const Eigen::Index> rows, int f) const {
        const double first = X_(rows.front(), f);
        return std::all_of(rows.begin(), rows.end(), [&](Eigen::Index i) { return X_(i, f) == first; });
    }

    SplitChoice find_split(std::span<const Eigen::Index> rows, const ClassHistogram& parent) const {
        const double total = parent[0] + parent[1] + parent[2];
        const auto n = rows.size();
        const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
        SplitChoice best;
        std::vector<Eigen::Index> sorted(rows.begin(), rows.end());

        for (int f : candidate_features(rows)) {
            std::stable_sort(sorted.begin(), sorted.end(),
                             [&](Eigen::Index a, Eigen::Index b) { return X_(a, f) < X_(b, f); });
            ClassHistogram left{};
            for (std::size_t p = 0; p + 1 < n; ++p) {
                const auto i = sorted[p];
                left[index(y_[static_cast<std::size_t>(i)])] += w_[static_cast<std::size_t>(i)];
                const double lo = X_(i, f);
                const double hi = X_(sorted[p + 1], f);
                if (!(lo < hi)) continue;
                if (p + 1 < min_leaf || n - p - 1 < min_leaf) continue;

                ClassHistogram right{};
                for (std::size_t k = 0; k < kNumLabels; ++k) right[k] = parent[k] - left[k];
                const double wl = left[0] + left[1] + left[2];
                const double wr = total - wl;
                SplitChoice cand;
                cand.feature = f;
                cand.threshold = midpoint(lo, hi);
                cand.impurity = (wl * gini(left) + wr * gini(right)) / total;
                if (better(cand, best)) best = cand;
            }
            // restore row order so the next stable sort starts from the same place
            std::copy(rows.begin(), rows.end(), sorted.begin());
        }
        return best;
    }

    static double midpoint(double lo, double hi) {
        const double m = lo + (hi - lo) / 2.0;
        return m < hi ? m : lo;
    }

    const Eigen::Ref<const FeatureMatrix>& X_;
    std::span<const IcapLabel> y_;
    std::span<const double> w_;
    const TreeParams& params_;
    Rng* rng_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

double gini(const ClassHistogram& h) {
    const double total = h[0] + h[1] + h[2];
    if (total <= 0.0) return 0.0;
    double sum_sq = 0.0;
    for (double v : h) sum_sq += (v / total) * (v / total);
    return 1.0 - sum_sq;
}

int TreeModel::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int best = 0;
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.is_leaf()) {
            stack.emplace_back(n.left, d + 1);
            stack.emplace_back(n.right, d + 1);
        }
    }
    return best;
}

std::size_t TreeModel::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

TreeModel grow_tree(const Eigen::Ref<const FeatureMatrix>& X, std::span<const IcapLabel> y,
                    std::span<const double> sample_weight, const TreeParams& params, Rng* feature_rng) {
    check_training_input(X.rows(), y.size());
    if (sample_weight.size() != y.size())
        throw DimensionMismatch("sample weights and labels differ in length");
    if (params.max_features && !feature_rng)
        throw std::invalid_argument("grow_tree: feature sampling needs a random source");
    return Grower(X, y, sample_weight, params, feature_rng).run();
}

TreeModel train_decision_tree(const Eigen::Ref<const FeatureMatrix>& X, std::span<const IcapLabel> y,
                              const TreeParams& params) {
    check_training_input(X.rows(), y.size());
    std::vector<double> w(y.size(), 1.0);
    TreeParams p = params;
    p.max_features.reset();
    return grow_tree(X, y, w, p);
}

FeatureMatrix to_dense(std::span<const FeatureVector> rows, Eigen::Index dim) {
    FeatureMatrix X = FeatureMatrix::Zero(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        check_feature_dim(rows[r].entries.size(), dim);
        for (Eigen::SparseVector<double>::InnerIterator it(rows[r].entries); it; ++it)
            X(static_cast<Eigen::Index>(r), it.index()) = it.value();
    }
    return X;
}

std::vector<IcapLabel> present_classes(std::span<const IcapLabel> y) {
    std::array<bool, kNumLabels> seen{};
    for (auto l : y) seen[index(l)] = true;
    std::vector<IcapLabel> out;
    for (auto l : kAllLabels)
        if (seen[index(l)]) out.push_back(l);
    return out;
}

}  // namespace engagelab::baselines
