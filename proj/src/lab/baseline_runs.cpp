#include "engagelab/lab/baseline_runs.hpp"

#include "engagelab/baselines/adaboost.hpp"
#include "engagelab/baselines/forest.hpp"
#include "engagelab/baselines/svm.hpp"
#include "engagelab/baselines/tree.hpp"
#include "engagelab/errors.hpp"

namespace engagelab::lab {

using baselines::ModelKind;
using nlohmann::ordered_json;

std::string display_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Svm: return "SVM";
        case ModelKind::RandomForest: return "RF";
        case ModelKind::DecisionTree: return "DT";
        case ModelKind::AdaBoost: return "ADABoost";
    }
    return "?";
}

namespace {

const char* short_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Svm: return "svm";
        case ModelKind::RandomForest: return "rf";
        case ModelKind::DecisionTree: return "dt";
        case ModelKind::AdaBoost: return "adaboost";
    }
    return "?";
}

baselines::AnyModel fit_model(ModelKind kind, const baselines::FeatureMatrix& X, std::span<const IcapLabel> y,
                          std::uint64_t seed) {
    switch (kind) {
        case ModelKind::DecisionTree: return baselines::train_decision_tree(X, y);
        case ModelKind::RandomForest: return baselines::train_random_forest(X, y, {}, seed);
        case ModelKind::AdaBoost: return baselines::train_adaboost(X, y);
        case ModelKind::Svm: {
            baselines::SvmParams p;
            p.seed = seed;
            return baselines::train_svm(X, y, p);
        }
    }
    throw ConfigError("unknown model kind");
}

std::vector<IcapLabel> gold_labels(const Dataset& d) {
    std::vector<IcapLabel> y;
    for (const auto& r : d.records()) {
        if (!r.gold) throw SchemaError("baseline training needs labeled records", r.id);
        y.push_back(*r.gold);
    }
    return y;
}

baselines::FeatureMatrix features(const Dataset& d, const TfidfModel& tfidf, const BaselineOptions& options) {
    std::vector<TokenDocument> docs;
    for (const auto& r : d.records())
        docs.push_back(preprocess_for_ml(r.id, r.response, default_stopwords(), options.preprocess));
    const auto rows = tfidf_transform(tfidf, docs);
    return baselines::to_dense(rows, tfidf.dim());
}

}  // namespace

std::vector<BaselineResult> train_baselines(const Dataset& d, const BaselineOptions& options) {
    const auto train = d.filtered(Split::Train);
    const auto test = d.filtered(Split::Test);
    if (train.empty() || test.empty())
        throw SplitMismatch("baselines need records tagged train and test (run `labctl split` first)");

    std::vector<TokenDocument> train_docs;
    for (const auto& r : train.records())
        train_docs.push_back(preprocess_for_ml(r.id, r.response, default_stopwords(), options.preprocess));
    const auto tfidf = tfidf_fit(train_docs);
    const auto X_train = baselines::to_dense(tfidf_transform(tfidf, train_docs), tfidf.dim());
    const auto X_test = features(test, tfidf, options);
    const auto y_train = gold_labels(train);
    const auto y_test = gold_labels(test);
    const auto digest = records_digest(test.records());

    std::vector<BaselineResult> out;
    for (auto kind : options.models) {
        RunRecord run;
        run.id = options.id_prefix + "-" + short_name(kind);
        run.kind = RunKind::Baseline;
        run.model = display_name(kind);
        run.evaluation_split = Split::Test;
        run.records = test.records();
        run.dataset_digest = digest;
        run.config = {{"model", to_string(kind)},
                      {"seed", options.seed},
                      {"dataset", d.name()},
                      {"features", {{"kind", "tfidf"}, {"vocabulary_size", tfidf.dim()}, {"train_records", train.size()}}},
                      {"correct_spelling", options.preprocess.correct_spelling}};

        run.started_at = utc_timestamp();
        auto model = fit_model(kind, X_train, y_train, options.seed);
        const auto predicted = baselines::predict(model, X_test);
        run.finished_at = utc_timestamp();

        for (std::size_t i = 0; i < predicted.size(); ++i) {
            Prediction p;
            p.record_id = run.records[i].id;
            p.predicted = predicted[i];
            p.parse_status = ParseStatus::Ok;
            run.predictions.push_back(std::move(p));
        }
        score_run(run);
        const auto train_pred = baselines::predict(model, X_train);
        run.train_metrics = class_metrics(confusion(y_train, train_pred));
        out.push_back({std::move(run), std::move(model)});
    }
    return out;
}

std::vector<RunRecord> run_baselines(const std::filesystem::path& dataset, RunStore& store,
                                     const BaselineOptions& options) {
    auto lock = store.lock();
    auto results = train_baselines(load_dataset(dataset), options);
    for (const auto& r : results)
        if (store.exists(r.run.id)) throw ConfigError("run '" + r.run.id + "' already exists");
    std::vector<RunRecord> runs;
    for (auto& r : results) {
        store.save(r.run);
        baselines::save_model(r.model, store.run_dir(r.run.id) / "model.json");
        runs.push_back(std::move(r.run));
    }
    return runs;
}

}  // namespace engagelab::lab
