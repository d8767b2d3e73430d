#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "engagelab/baselines/model_io.hpp"
#include "engagelab/lab/run_store.hpp"

namespace engagelab::lab {

struct BaselineOptions {
    std::uint64_t seed = 0;
    /// Run ids are <prefix>-svm, <prefix>-rf, <prefix>-dt, <prefix>-adaboost.
    std::string id_prefix = "baseline";
    PreprocessOptions preprocess;
    std::vector<baselines::ModelKind> models{baselines::ModelKind::Svm, baselines::ModelKind::RandomForest,
                                             baselines::ModelKind::DecisionTree, baselines::ModelKind::AdaBoost};
};

/// Display name used in tables: SVM, RF, DT, ADABoost.
std::string display_name(baselines::ModelKind kind);

struct BaselineResult {
    RunRecord run;
    baselines::AnyModel model;
};

/// TF-IDF over the train split, one model per kind, scored on the test split.
/// Nothing is persisted.
std::vector<BaselineResult> train_baselines(const Dataset& d, const BaselineOptions& options);

/// train_baselines on a dataset file, persisted with model.json alongside each run.
std::vector<RunRecord> run_baselines(const std::filesystem::path& dataset, RunStore& store,
                                     const BaselineOptions& options);

}  // namespace engagelab::lab
