#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "engagelab/baselines/adaboost.hpp"
#include "engagelab/baselines/forest.hpp"
#include "engagelab/baselines/svm.hpp"
#include "engagelab/baselines/tree.hpp"

namespace engagelab::baselines {

using AnyModel = std::variant<TreeModel, ForestModel, AdaBoostModel, SvmModel>;

enum class ModelKind { DecisionTree, RandomForest, AdaBoost, Svm };

const char* to_string(ModelKind kind);
/// Accepts the canonical names and the short forms dt, rf, ab, svm.
ModelKind parse_model_kind(std::string_view name);
ModelKind kind_of(const AnyModel& model);

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON text. Doubles are written with round-trip precision so a
/// reloaded model predicts bit-identically.
std::string serialize_model(const AnyModel& model);
AnyModel deserialize_model(std::string_view text);

void save_model(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);

inline Eigen::Index n_features(const AnyModel& model) {
    return std::visit([](const auto& m) { return m.n_features(); }, model);
}

/// Predicts each row of X.
template <typename Derived>
std::vector<IcapLabel> predict(const AnyModel& model, const Eigen::MatrixBase<Derived>& X) {
    check_feature_dim(X.cols(), n_features(model));
    std::vector<IcapLabel> out;
    out.reserve(static_cast<std::size_t>(X.rows()));
    std::visit(
        [&](const auto& m) {
            for (Eigen::Index i = 0; i < X.rows(); ++i) out.push_back(m.predict_one(X.row(i)));
        },
        model);
    return out;
}

}  // namespace engagelab::baselines
