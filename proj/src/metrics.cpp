#include "engagelab/metrics.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "engagelab/errors.hpp"

namespace engagelab {

using nlohmann::ordered_json;

ConfusionMatrix confusion(std::span<const IcapLabel> gold, std::span<const std::optional<IcapLabel>> pred) {
    if (gold.size() != pred.size())
        throw LengthMismatch("gold has " + std::to_string(gold.size()) + " labels, predictions " +
                             std::to_string(pred.size()));
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (!pred[i]) {
            ++cm.n_failed_parse;
            continue;
        }
        ++cm.counts(static_cast<Eigen::Index>(index(gold[i])), static_cast<Eigen::Index>(index(*pred[i])));
    }
    return cm;
}

ConfusionMatrix confusion(std::span<const IcapLabel> gold, std::span<const IcapLabel> pred) {
    std::vector<std::optional<IcapLabel>> p(pred.begin(), pred.end());
    return confusion(gold, std::span<const std::optional<IcapLabel>>(p));
}

double harmonic_f1(double precision, double recall) {
    const double s = precision + recall;
    return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm) {
    ClassMetrics m;
    const auto& c = cm.counts;
    const Eigen::Matrix<long long, 1, kNumLabels> predicted = c.colwise().sum();
    const Eigen::Matrix<long long, kNumLabels, 1> actual = c.rowwise().sum();
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(kNumLabels); ++k) {
        auto& s = m.per_class[static_cast<std::size_t>(k)];
        const auto tp = static_cast<double>(c(k, k));
        s.precision = predicted(k) == 0 ? 0.0 : tp / static_cast<double>(predicted(k));
        s.recall = actual(k) == 0 ? 0.0 : tp / static_cast<double>(actual(k));
        s.f1 = harmonic_f1(s.precision, s.recall);
        s.support = actual(k);
        m.macro_precision += s.precision / kNumLabels;
        m.macro_recall += s.recall / kNumLabels;
        m.macro_f1 += s.f1 / kNumLabels;
    }
    m.n_scored = cm.total();
    m.n_failed_parse = cm.n_failed_parse;
    m.accuracy = m.n_scored == 0 ? 0.0 : static_cast<double>(cm.trace()) / static_cast<double>(m.n_scored);
    return m;
}

double percent_increase(double new_score, double old_score) {
    if (old_score == 0.0) throw DivisionByZeroBaseline("percent increase over a zero baseline is undefined");
    return (new_score - old_score) / old_score * 100.0;
}

long long render_percent(double fraction) { return std::llround(fraction * 100.0); }

std::string_view to_string(DiffCategory c) noexcept {
    switch (c) {
        case DiffCategory::Small: return "small";
        case DiffCategory::Medium: return "medium";
        case DiffCategory::Large: return "large";
    }
    return "?";
}

DiffCategory categorize_diff(double diff, const DiffBands& bands) {
    const double a = std::abs(diff);
    if (a <= bands.small_max) return DiffCategory::Small;
    if (a <= bands.medium_max) return DiffCategory::Medium;
    return DiffCategory::Large;
}

Eigen::Index DiffMatrix::index_of(std::string_view model) const {
    for (std::size_t i = 0; i < models.size(); ++i)
        if (models[i] == model) return static_cast<Eigen::Index>(i);
    throw std::out_of_range("no model named '" + std::string(model) + "' in diff matrix");
}

DiffMatrix pairwise_diff_matrix(std::span<const NamedScore> scores, const DiffBands& bands) {
    if (scores.size() < 2) throw std::invalid_argument("a difference matrix needs at least two models");
    const auto n = static_cast<Eigen::Index>(scores.size());
    Eigen::VectorXd s(n);
    DiffMatrix d;
    for (Eigen::Index i = 0; i < n; ++i) {
        d.models.push_back(scores[static_cast<std::size_t>(i)].first);
        s(i) = scores[static_cast<std::size_t>(i)].second;
    }
    d.diffs = s.replicate(1, n) - s.transpose().replicate(n, 1);
    d.categories.assign(scores.size(), std::vector<DiffCategory>(scores.size(), DiffCategory::Small));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            d.categories[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = categorize_diff(d.diffs(i, j), bands);
    return d;
}

std::string_view to_string(MetricKind m) noexcept {
    switch (m) {
        case MetricKind::Precision: return "precision";
        case MetricKind::Recall: return "recall";
        case MetricKind::F1: return "f1";
    }
    return "?";
}

double metric_value(const PerClassScores& s, MetricKind m) {
    switch (m) {
        case MetricKind::Precision: return s.precision;
        case MetricKind::Recall: return s.recall;
        case MetricKind::F1: return s.f1;
    }
    return 0.0;
}

namespace {

PercentChange change(double exp, double base) {
    if (base == 0.0) return std::nullopt;
    return percent_increase(exp, base);
}

ordered_json change_json(const PercentChange& c) { return c ? ordered_json(*c) : ordered_json(nullptr); }

std::string fmt2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.2f%%", v);
    return buf;
}

std::string change_cell(const PercentChange& c) { return c ? fmt2(*c) : "undefined (baseline zero)"; }

}  // namespace

ComparisonReport percent_change_report(const std::string& baseline_name, const ClassMetrics& base,
                                       std::span<const NamedMetrics> experiments) {
    ComparisonReport r;
    r.baseline = baseline_name;
    for (const auto& [name, m] : experiments) {
        ExperimentChange e;
        e.name = name;
        for (auto l : kAllLabels)
            for (auto k : kAllMetricKinds)
                e.per_class[index(l)][static_cast<std::size_t>(k)] = change(metric_value(m[l], k), metric_value(base[l], k));
        e.accuracy = change(m.accuracy, base.accuracy);
        e.macro_f1 = change(m.macro_f1, base.macro_f1);
        r.experiments.push_back(std::move(e));
    }
    return r;
}

double cohen_kappa(std::span<const IcapLabel> a, std::span<const IcapLabel> b) {
    if (a.size() != b.size()) throw LengthMismatch("rater label lists differ in length");
    if (a.empty()) throw LengthMismatch("kappa needs at least one rated item");
    const auto cm = confusion(a, b);
    const double n = static_cast<double>(a.size());
    const Eigen::Vector3d pa = cm.counts.rowwise().sum().cast<double>() / n;
    const Eigen::Vector3d pb = cm.counts.colwise().sum().transpose().cast<double>() / n;
    const double po = static_cast<double>(cm.trace()) / n;
    const double pe = pa.dot(pb);
    if (pe == 1.0) return po == 1.0 ? 1.0 : 0.0;
    return (po - pe) / (1.0 - pe);
}

std::string metrics_to_json(const ConfusionMatrix& cm, const ClassMetrics& m) {
    ordered_json j;
    ordered_json grid = ordered_json::array();
    for (Eigen::Index g = 0; g < cm.counts.rows(); ++g) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index p = 0; p < cm.counts.cols(); ++p) row.push_back(cm.counts(g, p));
        grid.push_back(row);
    }
    j["confusion"] = {{"labels", {"Passive", "Active", "Constructive"}}, {"counts", grid}};
    j["n_scored"] = m.n_scored;
    j["n_failed_parse"] = m.n_failed_parse;
    ordered_json classes;
    for (auto l : kAllLabels) {
        const auto& s = m[l];
        classes[std::string(to_string(l))] = {{"precision", s.precision},
                                              {"recall", s.recall},
                                              {"f1", s.f1},
                                              {"support", s.support},
                                              {"precision_pct", render_percent(s.precision)},
                                              {"recall_pct", render_percent(s.recall)},
                                              {"f1_pct", render_percent(s.f1)}};
    }
    j["classes"] = classes;
    j["accuracy"] = m.accuracy;
    j["accuracy_pct"] = render_percent(m.accuracy);
    j["macro_precision"] = m.macro_precision;
    j["macro_recall"] = m.macro_recall;
    j["macro_f1"] = m.macro_f1;
    j["macro_f1_pct"] = render_percent(m.macro_f1);
    return j.dump(2) + "\n";
}

std::string comparison_to_json(const ComparisonReport& report) {
    ordered_json j;
    j["baseline"] = report.baseline;
    ordered_json exps = ordered_json::array();
    for (const auto& e : report.experiments) {
        ordered_json x;
        x["name"] = e.name;
        ordered_json classes;
        for (auto l : kAllLabels) {
            ordered_json c;
            for (auto k : kAllMetricKinds) c[std::string(to_string(k))] = change_json(e.at(l, k));
            classes[std::string(to_string(l))] = c;
        }
        x["percent_change"] = classes;
        x["accuracy"] = change_json(e.accuracy);
        x["macro_f1"] = change_json(e.macro_f1);
        exps.push_back(x);
    }
    j["experiments"] = exps;
    return j.dump(2) + "\n";
}

std::string diff_matrix_to_json(const DiffMatrix& d) {
    ordered_json j;
    j["models"] = d.models;
    ordered_json diffs = ordered_json::array(), cats = ordered_json::array();
    for (Eigen::Index i = 0; i < d.diffs.rows(); ++i) {
        ordered_json row = ordered_json::array(), crow = ordered_json::array();
        for (Eigen::Index k = 0; k < d.diffs.cols(); ++k) {
            row.push_back(d.diffs(i, k));
            crow.push_back(to_string(d.categories[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]));
        }
        diffs.push_back(row);
        cats.push_back(crow);
    }
    j["diffs"] = diffs;
    j["categories"] = cats;
    return j.dump(2) + "\n";
}

std::string render_metrics_markdown(std::span<const NamedMetrics> rows) {
    std::ostringstream out;
    out << "|";
    for (auto l : kAllLabels) {
        const long long support = rows.empty() ? 0 : rows.front().second[l].support;
        out << (l == IcapLabel::Passive ? " |" : "") << ' ' << to_string(l) << " (" << support << ") | | |";
    }
    out << "\n|---|";
    for (std::size_t i = 0; i < 3 * kNumLabels; ++i) out << "---|";
    out << "\n| Model |";
    for (std::size_t i = 0; i < kNumLabels; ++i) out << " P | R | F1 |";
    out << '\n';
    bool any_zero = false;
    for (const auto& [name, m] : rows) {
        out << "| " << name << " |";
        for (auto l : kAllLabels) {
            const auto& s = m[l];
            out << ' ' << render_percent(s.precision) << " | " << render_percent(s.recall) << " | "
                << render_percent(s.f1) << " |";
            if (s.precision + s.recall == 0.0) any_zero = true;
        }
        out << '\n';
    }
    if (any_zero) out << "\nScores with a zero denominator are reported as 0.\n";
    for (const auto& [name, m] : rows)
        if (m.n_failed_parse > 0)
            out << "\n**" << name << ": " << m.n_failed_parse << " unparsed predictions excluded from scoring.**\n";
    return out.str();
}

std::string render_comparison_markdown(const ComparisonReport& report) {
    std::ostringstream out;
    out << "Percent change against baseline `" << report.baseline << "`\n\n| Experiment |";
    for (auto l : kAllLabels)
        for (auto k : kAllMetricKinds) out << ' ' << to_string(l) << ' ' << to_string(k) << " |";
    out << " accuracy | macro F1 |\n|---|";
    for (std::size_t i = 0; i < 3 * kNumLabels + 2; ++i) out << "---|";
    out << '\n';
    for (const auto& e : report.experiments) {
        out << "| " << e.name << " |";
        for (auto l : kAllLabels)
            for (auto k : kAllMetricKinds) out << ' ' << change_cell(e.at(l, k)) << " |";
        out << ' ' << change_cell(e.accuracy) << " | " << change_cell(e.macro_f1) << " |\n";
    }
    return out.str();
}

std::string render_diff_markdown(const DiffMatrix& d, std::string_view title) {
    std::ostringstream out;
    out << title << "\n\n| |";
    for (const auto& m : d.models) out << ' ' << m << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < d.models.size(); ++i) out << "---|";
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < d.models.size(); ++i) {
        out << "| " << d.models[i] << " |";
        for (std::size_t k = 0; k < d.models.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%+.0f", d.diffs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
            out << ' ' << (i == k ? std::string("0") : std::string(buf) + " (" + std::string(to_string(d.categories[i][k])) + ")")
                << " |";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace engagelab
