#include <gtest/gtest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>

#include "engagelab/errors.hpp"
#include "engagelab/lab/baseline_runs.hpp"
#include "engagelab/lab/experiment.hpp"
#include "engagelab/lab/report.hpp"
#include "engagelab/lab/run_store.hpp"
#include "engagelab/resources.hpp"
#include "support.hpp"

using namespace engagelab;
using namespace engagelab::lab;
namespace fs = std::filesystem;

namespace {

// 40/40/28 split a quarter to test: the test side is exactly 10/10/7.
Dataset tagged_corpus(SampleStyle style = SampleStyle::Distinct) {
    auto d = generate_sample_corpus(21, {40, 40, 28}, style);
    auto s = stratified_split(d, 0.25, 4);
    auto rs = s.train.records();
    rs.insert(rs.end(), s.test.records().begin(), s.test.records().end());
    return Dataset("tagged", "synthetic", std::move(rs));
}

class LabTest : public ::testing::Test {
protected:
    void SetUp() override {
        dataset_path = tmp / "data.jsonl";
        save_dataset(tagged_corpus(), dataset_path, DatasetFormat::Jsonl);
        spec_path = tmp / "spec.json";
        testsupport::spit(spec_path, testsupport::slurp(resource_path("prompt/spec_variant_b.json")));
        for (const char* f : {"exemplars.json", "assertions.json"})
            fs::copy_file(resource_path("prompt") / f, tmp / f);
    }

    ExperimentConfig config(std::string id, std::string mock = "") const {
        ExperimentConfig c;
        c.id = std::move(id);
        c.prompt_spec = spec_path;
        c.dataset = dataset_path;
        c.evaluation_split = EvaluationSplit::Subset;
        c.subset_counts = LabelCounts{10, 10, 7};
        c.transport = TransportKind::Mock;
        c.mock_script = std::move(mock);
        return c;
    }

    testsupport::TempDir tmp;
    fs::path dataset_path, spec_path;
    RunStore store{tmp.path() / "store"};
};

const char* kFlipConstructive = R"({"mode":"flip","flips":{"Constructive":"Active"}})";

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LABCTL_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_F(LabTest, GoldMockSubsetRunIsPerfectAndPasses) {
    auto run = run_experiment(config("gold"), store);
    EXPECT_EQ(run.records.size(), 27u);
    EXPECT_EQ(run.evaluation_split, Split::Subset);
    EXPECT_EQ(run.metrics.accuracy, 1.0);
    for (const auto& s : run.metrics.per_class) EXPECT_EQ(s.f1, 1.0);
    ASSERT_TRUE(run.gate.has_value());
    EXPECT_TRUE(run.gate->passed);
    EXPECT_EQ(run.gate->source, "none");
    EXPECT_EQ(diagnose(run).size(), 0u);
    EXPECT_NE(render(diagnose(run), OutputFormat::Markdown).find("No misclassifications."), std::string::npos);
}

TEST_F(LabTest, FlipMockGroupsConstructiveUnderActive) {
    auto run = run_experiment(config("flip", kFlipConstructive), store);
    EXPECT_EQ(run.metrics[IcapLabel::Constructive].recall, 0.0);
    auto report = diagnose(run);
    ASSERT_EQ(report.groups.size(), 1u);
    EXPECT_EQ(report.groups[0].gold, IcapLabel::Constructive);
    EXPECT_EQ(report.groups[0].predicted, IcapLabel::Active);
    EXPECT_EQ(report.groups[0].items.size(), 7u);
    EXPECT_FALSE(report.groups[0].items[0].reasoning.empty());
    const auto& cm = run.confusion;
    EXPECT_EQ(static_cast<long long>(report.size()),
              cm.total() - cm.trace() - static_cast<long long>(cm.n_failed_parse));
}

TEST_F(LabTest, StoreRoundTripAndLayout) {
    auto run = run_experiment(config("r1", kFlipConstructive), store);
    for (const char* f : {"config.json", "dataset.jsonl", "predictions.jsonl", "metrics.json", "run.json"})
        EXPECT_TRUE(fs::exists(store.run_dir("r1") / f)) << f;
    auto back = store.load("r1");
    EXPECT_EQ(back.predictions, run.predictions);
    EXPECT_EQ(back.metrics, run.metrics);
    EXPECT_EQ(back.gate, run.gate);
    EXPECT_EQ(predictions_jsonl(back), predictions_jsonl(run));
    EXPECT_EQ(store.list(), (std::vector<std::string>{"r1"}));
    EXPECT_THROW(run_experiment(config("r1"), store), ConfigError);
    EXPECT_THROW(store.load("missing"), Error);
}

TEST_F(LabTest, SnapshotIsFrozen) {
    run_experiment(config("frozen"), store);
    const auto before = testsupport::slurp(store.run_dir("frozen") / "config.json");
    testsupport::spit(spec_path, R"({"template_version":"v1","include_improvement_steps":false,"exemplars":"exemplars.json"})");
    EXPECT_EQ(testsupport::slurp(store.run_dir("frozen") / "config.json"), before);
    auto run = store.load("frozen");
    EXPECT_TRUE(run.config.at("prompt_spec").at("include_improvement_steps").get<bool>());
}

TEST_F(LabTest, LockIsExclusive) {
    auto held = store.lock();
    EXPECT_THROW(run_experiment(config("blocked"), store), ConfigError);
}

TEST_F(LabTest, GateAgainstBaselineRun) {
    auto weak = run_experiment(config("weak", kFlipConstructive), store);
    auto strong_cfg = config("strong");
    strong_cfg.baseline_run = "weak";
    auto strong = run_experiment(strong_cfg, store);
    EXPECT_TRUE(strong.gate->passed);
    EXPECT_EQ(strong.gate->source, "baseline:weak");
    EXPECT_DOUBLE_EQ(strong.gate->threshold, weak.metrics.macro_f1);

    auto worse_cfg = config("worse", kFlipConstructive);
    worse_cfg.baseline_run = "strong";
    EXPECT_FALSE(run_experiment(worse_cfg, store).gate->passed);

    auto fixed = config("fixed");
    fixed.gate = {GateMetric::Accuracy, 0.99};
    auto g = run_experiment(fixed, store).gate;
    EXPECT_EQ(g->source, "threshold");
    EXPECT_EQ(g->metric, "accuracy");

    auto dangling = config("dangling");
    dangling.baseline_run = "nope";
    EXPECT_THROW(run_experiment(dangling, store), ConfigError);
}

TEST_F(LabTest, ReplayIsDeterministicAcrossParallelism) {
    auto cfg = config("recorded", kFlipConstructive);
    cfg.cache = tmp / "cache.jsonl";
    run_experiment(cfg, store);
    auto a = replay_run(store, "recorded", tmp / "cache.jsonl", "replay-1", 1);
    auto b = replay_run(store, "recorded", tmp / "cache.jsonl", "replay-8", 8);
    EXPECT_EQ(predictions_jsonl(a), predictions_jsonl(b));
    EXPECT_EQ(metrics_to_json(a.confusion, a.metrics), metrics_to_json(b.confusion, b.metrics));
    EXPECT_EQ(a.evaluation_split, Split::Subset);
    EXPECT_EQ(a.transport_errors(), 0u);
    // replay evaluates the same records, so it compares against the original
    std::vector<RunRecord> exps{a};
    EXPECT_NO_THROW(compare(store.load("recorded"), exps));
}

TEST_F(LabTest, ReplayWithEmptyCacheRecordsTransportErrors) {
    run_experiment(config("orig"), store);
    testsupport::spit(tmp / "empty.jsonl", "");
    auto r = replay_run(store, "orig", tmp / "empty.jsonl", "orig-replay", 2);
    EXPECT_EQ(r.transport_errors(), 27u);
}

TEST_F(LabTest, CompareRules) {
    auto base = run_experiment(config("base"), store);
    auto flip = run_experiment(config("flip", kFlipConstructive), store);
    std::vector<RunRecord> self{base};
    auto same = compare(base, self);
    for (auto l : kAllLabels)
        for (auto k : kAllMetricKinds) EXPECT_EQ(same.report.experiments[0].at(l, k), 0.0);

    auto test_cfg = config("on-test");
    test_cfg.evaluation_split = EvaluationSplit::Test;
    auto on_test = run_experiment(test_cfg, store);
    std::vector<RunRecord> other{on_test};
    EXPECT_THROW(compare(base, other), SplitMismatch);

    std::vector<RunRecord> ab{base, flip}, ba{flip, base};
    auto x = compare(base, ab), y = compare(base, ba);
    EXPECT_EQ(x.report.experiments[0].name, y.report.experiments[1].name);
    EXPECT_EQ(x.report.experiments[1].at(IcapLabel::Active, MetricKind::Precision),
              y.report.experiments[0].at(IcapLabel::Active, MetricKind::Precision));
    const auto md = render(x, OutputFormat::Markdown);
    EXPECT_EQ(md, render(x, OutputFormat::Markdown));
    EXPECT_NO_THROW((void)nlohmann::json::parse(render(x, OutputFormat::Json)));
}

TEST_F(LabTest, RenderRunsTable) {
    std::vector<RunRecord> runs{run_experiment(config("a"), store), run_experiment(config("b", kFlipConstructive), store)};
    const auto md = render(runs, OutputFormat::Markdown);
    EXPECT_NE(md.find("| | Passive (10) | | | Active (10) | | | Constructive (7) | | |"), std::string::npos);
    EXPECT_EQ(md, render(runs, OutputFormat::Markdown));
}

TEST_F(LabTest, ConfigFromJson) {
    nlohmann::ordered_json j = {{"id", "x"}, {"prompt_spec", "spec.json"}, {"dataset", "data.jsonl"},
                                {"subset", "P=1,A=2,C=3"}, {"llm", {{"max_parallel", 4}}}};
    auto c = ExperimentConfig::from_json(j, tmp.path());
    EXPECT_EQ(c.prompt_spec, tmp / "spec.json");
    EXPECT_EQ(c.subset_counts, (LabelCounts{1, 2, 3}));
    EXPECT_EQ(c.llm.max_parallel, 4);
    EXPECT_EQ(c.gate.metric, GateMetric::MacroF1);
    auto again = ExperimentConfig::from_json(c.to_json(), "/");
    EXPECT_EQ(again.to_json(), c.to_json());

    j["llm"]["api_key"] = "sk-nope";
    EXPECT_THROW(ExperimentConfig::from_json(j, tmp.path()), ConfigError);
    j["llm"].erase("api_key");
    j["llm"]["top_p"] = 0.0;
    EXPECT_THROW(ExperimentConfig::from_json(j, tmp.path()), ConfigError);
    j["llm"]["top_p"] = 0.5;
    j["transport"] = "carrier-pigeon";
    EXPECT_THROW(ExperimentConfig::from_json(j, tmp.path()), ConfigError);
}

TEST(Baselines, SeparableCorpusFitsTrainAndIsRepeatable) {
    auto d = tagged_corpus(SampleStyle::Distinct);
    BaselineOptions o;
    o.seed = 3;
    auto a = train_baselines(d, o);
    auto b = train_baselines(d, o);
    ASSERT_EQ(a.size(), 4u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_TRUE(a[i].run.train_metrics.has_value());
        EXPECT_EQ(a[i].run.train_metrics->accuracy, 1.0) << a[i].run.model;
        EXPECT_EQ(predictions_jsonl(a[i].run), predictions_jsonl(b[i].run));
        EXPECT_EQ(a[i].run.dataset_digest, a[0].run.dataset_digest);
        EXPECT_EQ(a[i].run.kind, RunKind::Baseline);
        EXPECT_EQ(a[i].run.evaluation_split, Split::Test);
    }
    EXPECT_EQ(a[0].run.id, "baseline-svm");
    EXPECT_EQ(a[0].run.model, "SVM");
}

TEST(Baselines, NeedBothSplits) {
    auto d = generate_sample_corpus(1, {5, 5, 5});
    EXPECT_THROW(train_baselines(d, {}), SplitMismatch);
}

TEST(Baselines, PersistedWithModels) {
    testsupport::TempDir tmp;
    save_dataset(tagged_corpus(), tmp / "d.jsonl", DatasetFormat::Jsonl);
    RunStore store(tmp / "store");
    BaselineOptions o;
    o.models = {baselines::ModelKind::DecisionTree};
    auto runs = run_baselines(tmp / "d.jsonl", store, o);
    ASSERT_EQ(runs.size(), 1u);
    EXPECT_TRUE(fs::exists(store.run_dir("baseline-dt") / "model.json"));
    EXPECT_EQ(diagnose(store.load("baseline-dt")).size(),
              static_cast<std::size_t>(runs[0].confusion.total() - runs[0].confusion.trace()));
}

TEST(Cli, ExitCodes) {
    testsupport::TempDir tmp;
    const auto store = " --store " + (tmp / "store").string();
    const auto data = (tmp / "d.jsonl").string();
    EXPECT_EQ(run_cli("--bogus-flag"), 1);
    EXPECT_EQ(run_cli("ingest --sample --per-class P=40,A=40,C=28 -o " + data), 0);
    EXPECT_EQ(run_cli("split " + data + " -o " + data), 0);
    EXPECT_EQ(run_cli("ingest /no/such/file.jsonl"), 2);

    fs::copy_file(resource_path("prompt/spec_variant_a.json"), tmp / "spec.json");
    fs::copy_file(resource_path("prompt/exemplars.json"), tmp / "exemplars.json");
    auto write_config = [&](const std::string& name, nlohmann::ordered_json extra) {
        nlohmann::ordered_json j = {{"id", name}, {"prompt_spec", "spec.json"}, {"dataset", "d.jsonl"},
                                    {"evaluation_split", "test"}};
        for (auto& [k, v] : extra.items()) j[k] = v;
        testsupport::spit(tmp / (name + ".json"), j.dump());
        return (tmp / (name + ".json")).string();
    };
    EXPECT_EQ(run_cli(store + " --config " + write_config("ok", {{"cache", "c.jsonl"}}) + " run"), 0);
    EXPECT_EQ(run_cli(store + " --config " +
                      write_config("gated", {{"mock", {{"mode", "constant"}, {"label", "Passive"}}},
                                             {"gate", {{"metric", "accuracy"}, {"threshold", 0.9}}}}) +
                      " run"),
              4);
    EXPECT_EQ(run_cli(store + " --config " + write_config("nocache", {{"transport", "replay"}, {"cache", "none.jsonl"}}) +
                      " run"),
              1);
    testsupport::spit(tmp / "empty.jsonl", "");
    EXPECT_EQ(run_cli(store + " --config " + write_config("miss", {{"transport", "replay"}, {"cache", "empty.jsonl"}}) +
                      " run"),
              3);
    EXPECT_EQ(run_cli(store + " --config " + write_config("keyed", {{"llm", {{"api_key", "x"}}}}) + " run"), 1);
    EXPECT_EQ(run_cli(store + " replay ok --cache " + (tmp / "c.jsonl").string() + " --parallel 4"), 0);
    EXPECT_EQ(run_cli(store + " diagnose ok"), 0);
    EXPECT_EQ(run_cli(store + " compare ok ok-replay"), 0);
    EXPECT_EQ(run_cli(store + " --format json render ok gated"), 0);
}
