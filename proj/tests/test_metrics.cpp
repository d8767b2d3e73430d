#include <gtest/gtest.h>

#include <json.hpp>

#include <random>

#include "engagelab/errors.hpp"
#include "engagelab/metrics.hpp"
#include "oracles/metrics_oracle.hpp"

using namespace engagelab;
using L = IcapLabel;

namespace {

ConfusionMatrix from_counts(std::initializer_list<std::initializer_list<long long>> rows) {
    ConfusionMatrix cm;
    int g = 0;
    for (auto r : rows) {
        int p = 0;
        for (auto v : r) cm.counts(g, p++) = v;
        ++g;
    }
    return cm;
}

// Constructed LLM test-set matrix with the Passive 62 / Active 66 / Constructive 7 support.
ConfusionMatrix llm_fixture() { return from_counts({{54, 8, 0}, {11, 36, 19}, {0, 2, 5}}); }

}  // namespace

TEST(Confusion, SmallExamples) {
    std::vector<L> g{L::Passive, L::Active};
    auto cm = confusion(g, std::vector<L>{L::Passive, L::Active});
    EXPECT_EQ(cm.counts.diagonal(), (Eigen::Matrix<long long, 3, 1>(1, 1, 0)));
    EXPECT_EQ(cm.total(), cm.trace());

    std::vector<L> one{L::Passive};
    auto failed = confusion(one, std::vector<std::optional<L>>{std::nullopt});
    EXPECT_EQ(failed.total(), 0);
    EXPECT_EQ(failed.n_failed_parse, 1u);

    std::vector<L> c{L::Constructive};
    EXPECT_EQ(confusion(c, std::vector<L>{L::Active}).counts(2, 1), 1);

    EXPECT_THROW(confusion(g, std::vector<L>{L::Passive}), LengthMismatch);
}

TEST(ClassMetrics, PerfectAndAbsentClass) {
    std::vector<L> g{L::Passive, L::Active, L::Active};
    auto m = class_metrics(confusion(g, g));
    EXPECT_EQ(m.accuracy, 1.0);
    EXPECT_EQ(m[L::Passive].f1, 1.0);
    EXPECT_EQ(m[L::Constructive].precision, 0.0);
    EXPECT_EQ(m[L::Constructive].recall, 0.0);
    EXPECT_EQ(m[L::Constructive].f1, 0.0);
}

TEST(ClassMetrics, HarmonicMeanRendering) {
    EXPECT_NEAR(harmonic_f1(0.21, 0.71), 0.32413, 1e-5);
    EXPECT_EQ(render_percent(harmonic_f1(0.21, 0.71)), 32);
    EXPECT_EQ(harmonic_f1(0.0, 0.0), 0.0);
}

TEST(ClassMetrics, MatchesCountingOracle) {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = std::uniform_int_distribution<std::size_t>(1, 1000)(gen);
        std::vector<int> gi(n);
        std::vector<std::optional<int>> pi(n);
        std::vector<L> gold(n);
        std::vector<std::optional<L>> pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            gi[i] = static_cast<int>(gen() % 3);
            gold[i] = static_cast<L>(gi[i]);
            if (gen() % 20 != 0) {
                pi[i] = static_cast<int>(gen() % 3);
                pred[i] = static_cast<L>(*pi[i]);
            }
        }
        const auto cm = confusion(gold, pred);
        const auto m = class_metrics(cm);
        const auto o = oracle::per_class(gi, pi);
        for (std::size_t c = 0; c < 3; ++c) {
            EXPECT_NEAR(m.per_class[c].precision, o[c].precision, 1e-12);
            EXPECT_NEAR(m.per_class[c].recall, o[c].recall, 1e-12);
            EXPECT_NEAR(m.per_class[c].f1, o[c].f1, 1e-12);
        }
        EXPECT_NEAR(m.accuracy, oracle::accuracy(gi, pi), 1e-12);
        EXPECT_EQ(cm.evaluated(), n);
        // single-label multi-class: micro precision = micro recall = accuracy
        long long tp = 0;
        for (int c = 0; c < 3; ++c) tp += cm.counts(c, c);
        EXPECT_EQ(tp, cm.trace());
        for (const auto& s : m.per_class) {
            EXPECT_GE(s.f1, 0.0);
            EXPECT_LE(s.f1, 1.0);
        }
    }
}

TEST(PercentIncrease, Values) {
    EXPECT_NEAR(percent_increase(85, 74), 14.864865, 1e-6);
    EXPECT_NEAR(percent_increase(85, 69), 23.188406, 1e-6);
    EXPECT_EQ(percent_increase(0.4, 0.4), 0.0);
    EXPECT_THROW(percent_increase(0.3, 0.0), DivisionByZeroBaseline);
}

TEST(PercentIncrease, MonotoneInNewScore) {
    double prev = percent_increase(0.0, 0.37);
    for (double x = 0.01; x <= 1.0; x += 0.01) {
        const double v = percent_increase(x, 0.37);
        EXPECT_GT(v, prev);
        prev = v;
    }
}

TEST(DiffMatrix, BandsAndBoundaries) {
    EXPECT_EQ(categorize_diff(10.0), DiffCategory::Small);
    EXPECT_EQ(categorize_diff(-10.0), DiffCategory::Small);
    EXPECT_EQ(categorize_diff(10.5), DiffCategory::Medium);
    EXPECT_EQ(categorize_diff(30.0), DiffCategory::Medium);
    EXPECT_EQ(categorize_diff(30.01), DiffCategory::Large);
    EXPECT_EQ(categorize_diff(25, {20, 40}), DiffCategory::Medium);
}

TEST(DiffMatrix, AntisymmetricWithZeroDiagonal) {
    std::mt19937_64 gen(5);
    for (int t = 0; t < 50; ++t) {
        std::vector<NamedScore> s;
        const int k = 2 + static_cast<int>(gen() % 5);
        for (int i = 0; i < k; ++i) s.push_back({"m" + std::to_string(i), double(gen() % 10000) / 100.0});
        auto d = pairwise_diff_matrix(s);
        for (int i = 0; i < k; ++i) {
            EXPECT_EQ(d.diffs(i, i), 0.0);
            for (int j = 0; j < k; ++j) EXPECT_EQ(d.diffs(i, j), -d.diffs(j, i));
        }
    }
    std::vector<NamedScore> one{{"a", 1.0}};
    EXPECT_THROW(pairwise_diff_matrix(one), std::invalid_argument);
}

TEST(DiffMatrix, PassiveRow) {
    std::vector<NamedScore> s{{"SVM", 74}, {"RF", 80}, {"DT", 72}, {"ADABoost", 69}, {"LLM", 85}};
    auto d = pairwise_diff_matrix(s);
    EXPECT_EQ(d.diff("LLM", "SVM"), 11);
    EXPECT_EQ(d.diff("LLM", "RF"), 5);
    EXPECT_EQ(d.diff("LLM", "DT"), 13);
    EXPECT_EQ(d.diff("LLM", "ADABoost"), 16);
    EXPECT_EQ(d.category("LLM", "SVM"), DiffCategory::Medium);
    EXPECT_EQ(d.category("LLM", "RF"), DiffCategory::Small);
    EXPECT_EQ(d.category("LLM", "ADABoost"), DiffCategory::Medium);
}

TEST(ComparisonReport, SelfIsZeroAndZeroBaselineUndefined) {
    auto base = class_metrics(llm_fixture());
    std::vector<NamedMetrics> exps{{"same", base}};
    auto r = percent_change_report("base", base, exps);
    for (auto l : kAllLabels)
        for (auto k : kAllMetricKinds) EXPECT_EQ(r.experiments[0].at(l, k), 0.0);
    EXPECT_EQ(r.experiments[0].accuracy, 0.0);

    ClassMetrics zero;
    std::vector<NamedMetrics> one{{"llm", base}};
    auto z = percent_change_report("svm", zero, one);
    EXPECT_FALSE(z.experiments[0].at(L::Constructive, MetricKind::F1).has_value());
    EXPECT_NE(render_comparison_markdown(z).find("undefined (baseline zero)"), std::string::npos);
}

TEST(ComparisonReport, ConstructedAccuracyAndPrecisionDeltas) {
    // Absolute values are not published; these fixtures are chosen to land on
    // the reported percentage changes.
    ClassMetrics base, exp5, exp61;
    base.accuracy = 0.67;
    exp5.accuracy = 0.73;
    exp61.accuracy = 0.75;
    base.per_class[1].precision = 0.658;
    exp61.per_class[1].precision = 0.763;
    std::vector<NamedMetrics> exps{{"exp5", exp5}, {"exp6.1", exp61}};
    auto r = percent_change_report("baseline", base, exps);
    EXPECT_NEAR(*r.experiments[0].accuracy, 8.96, 0.005);
    EXPECT_NEAR(*r.experiments[1].accuracy, 11.94, 0.005);
    EXPECT_NEAR(*r.experiments[1].at(L::Active, MetricKind::Precision), 15.96, 0.005);
    EXPECT_EQ(r.experiments[0].name, "exp5");
}

TEST(Kappa, Fixtures) {
    std::vector<L> a{L::Passive, L::Passive, L::Active, L::Active};
    std::vector<L> b{L::Passive, L::Active, L::Passive, L::Active};
    EXPECT_NEAR(cohen_kappa(a, b), 0.0, 1e-12);
    std::vector<L> c{L::Passive, L::Active}, d{L::Active, L::Passive};
    EXPECT_NEAR(cohen_kappa(c, d), -1.0, 1e-12);
    EXPECT_EQ(cohen_kappa(a, a), 1.0);
    std::vector<L> same{L::Active, L::Active};
    EXPECT_EQ(cohen_kappa(same, same), 1.0);
    EXPECT_THROW(cohen_kappa(a, c), LengthMismatch);
    EXPECT_THROW(cohen_kappa(std::vector<L>{}, std::vector<L>{}), LengthMismatch);
}

TEST(Render, MetricsTableLayout) {
    std::vector<NamedMetrics> rows{{"LLM", class_metrics(llm_fixture())}};
    const auto md = render_metrics_markdown(rows);
    EXPECT_EQ(md.substr(0, md.find('\n')), "| | Passive (62) | | | Active (66) | | | Constructive (7) | | |");
    EXPECT_NE(md.find("| Model | P | R | F1 | P | R | F1 | P | R | F1 |"), std::string::npos);
    EXPECT_NE(md.find("| LLM | 83 | 87 | 85 |"), std::string::npos);
    EXPECT_EQ(md, render_metrics_markdown(rows));
}

TEST(Render, JsonHasFractionsAndPercents) {
    auto cm = llm_fixture();
    auto j = nlohmann::json::parse(metrics_to_json(cm, class_metrics(cm)));
    EXPECT_NEAR(j["classes"]["Passive"]["precision"].get<double>(), 54.0 / 65.0, 1e-12);
    EXPECT_EQ(j["classes"]["Passive"]["precision_pct"], 83);
    EXPECT_EQ(j["confusion"]["counts"][1][2], 19);
}
