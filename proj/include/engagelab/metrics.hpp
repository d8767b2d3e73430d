#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "engagelab/label.hpp"

namespace engagelab {

using CountMatrix = Eigen::Matrix<long long, kNumLabels, kNumLabels>;

/// counts(gold, predicted). Failed parses are kept out of the grid.
struct ConfusionMatrix {
    CountMatrix counts = CountMatrix::Zero();
    std::size_t n_failed_parse = 0;

    long long total() const { return counts.sum(); }
    long long trace() const { return counts.trace(); }
    std::size_t evaluated() const { return static_cast<std::size_t>(total()) + n_failed_parse; }

    bool operator==(const ConfusionMatrix& o) const {
        return counts == o.counts && n_failed_parse == o.n_failed_parse;
    }
};

ConfusionMatrix confusion(std::span<const IcapLabel> gold, std::span<const std::optional<IcapLabel>> pred);
ConfusionMatrix confusion(std::span<const IcapLabel> gold, std::span<const IcapLabel> pred);

/// 0 when p + r == 0.
double harmonic_f1(double precision, double recall);

struct PerClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long long support = 0;

    bool operator==(const PerClassScores&) const = default;
};

/// Scores are fractions in [0, 1]. Macro averages run over all three classes.
struct ClassMetrics {
    std::array<PerClassScores, kNumLabels> per_class{};
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    long long n_scored = 0;
    std::size_t n_failed_parse = 0;

    const PerClassScores& operator[](IcapLabel l) const { return per_class[index(l)]; }
    bool operator==(const ClassMetrics&) const = default;
};

ClassMetrics class_metrics(const ConfusionMatrix& cm);

/// ((new - old) / old) * 100. Throws DivisionByZeroBaseline when old == 0.
double percent_increase(double new_score, double old_score);

/// Integer display value of a fraction, e.g. 0.3241 -> 32.
long long render_percent(double fraction);

enum class DiffCategory { Small, Medium, Large };
std::string_view to_string(DiffCategory c) noexcept;

/// |d| <= small_max is small, |d| <= medium_max medium, anything above large.
struct DiffBands {
    double small_max = 10.0;
    double medium_max = 30.0;
};

DiffCategory categorize_diff(double diff, const DiffBands& bands = {});

/// diffs(i, j) = s_i - s_j on the percent scale.
struct DiffMatrix {
    std::vector<std::string> models;
    Eigen::MatrixXd diffs;
    std::vector<std::vector<DiffCategory>> categories;

    Eigen::Index index_of(std::string_view model) const;
    double diff(std::string_view a, std::string_view b) const { return diffs(index_of(a), index_of(b)); }
    DiffCategory category(std::string_view a, std::string_view b) const {
        return categories[static_cast<std::size_t>(index_of(a))][static_cast<std::size_t>(index_of(b))];
    }
};

using NamedScore = std::pair<std::string, double>;

/// Scores are given on the percent scale (score x 100). Needs two or more models.
DiffMatrix pairwise_diff_matrix(std::span<const NamedScore> scores, const DiffBands& bands = {});

enum class MetricKind { Precision, Recall, F1 };
inline constexpr std::array<MetricKind, 3> kAllMetricKinds{MetricKind::Precision, MetricKind::Recall,
                                                            MetricKind::F1};
std::string_view to_string(MetricKind m) noexcept;
double metric_value(const PerClassScores& s, MetricKind m);

/// Percent change against the baseline; empty when the baseline value is zero.
using PercentChange = std::optional<double>;

struct ExperimentChange {
    std::string name;
    std::array<std::array<PercentChange, 3>, kNumLabels> per_class{};  // [class][metric]
    PercentChange accuracy;
    PercentChange macro_f1;

    const PercentChange& at(IcapLabel l, MetricKind m) const { return per_class[index(l)][static_cast<std::size_t>(m)]; }
};

struct ComparisonReport {
    std::string baseline;
    std::vector<ExperimentChange> experiments;
};

using NamedMetrics = std::pair<std::string, ClassMetrics>;

ComparisonReport percent_change_report(const std::string& baseline_name, const ClassMetrics& base,
                                       std::span<const NamedMetrics> experiments);

/// Returns 1 when both raters are constant and agree.
double cohen_kappa(std::span<const IcapLabel> a, std::span<const IcapLabel> b);

/// JSON with fraction and rendered-percent fields, keys in a fixed order.
std::string metrics_to_json(const ConfusionMatrix& cm, const ClassMetrics& m);
std::string comparison_to_json(const ComparisonReport& report);
std::string diff_matrix_to_json(const DiffMatrix& d);

/// Class-grouped P/R/F1 table, one row per model. Group headers carry the
/// gold support of the first row.
std::string render_metrics_markdown(std::span<const NamedMetrics> rows);
std::string render_comparison_markdown(const ComparisonReport& report);
std::string render_diff_markdown(const DiffMatrix& d, std::string_view title);

}  // namespace engagelab
