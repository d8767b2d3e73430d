#include "engagelab/baselines/model_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "engagelab/resources.hpp"

namespace engagelab::baselines {

using nlohmann::json;

namespace {

json labels_json(const std::vector<IcapLabel>& classes) {
    json a = json::array();
    for (auto c : classes) a.push_back(to_string(c));
    return a;
}

std::vector<IcapLabel> labels_from(const json& a) {
    std::vector<IcapLabel> out;
    for (const auto& v : a) {
        auto l = parse_label_name(v.get<std::string>());
        if (!l) throw SchemaError("model file: unknown class " + v.dump());
        out.push_back(*l);
    }
    return out;
}

json tree_json(const TreeModel& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"histogram", n.histogram},
                         {"n_samples", n.n_samples}});
    }
    return {{"n_features", t.n_features()}, {"nodes", nodes}};
}

TreeModel tree_from(const json& j) {
    std::vector<TreeNode> nodes;
    const auto n_features = j.at("n_features").get<Eigen::Index>();
    for (const auto& n : j.at("nodes")) {
        TreeNode node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.histogram = n.at("histogram").get<ClassHistogram>();
        node.n_samples = n.at("n_samples").get<Eigen::Index>();
        nodes.push_back(node);
    }
    if (nodes.empty()) throw SchemaError("model file: tree without nodes");
    const auto count = static_cast<int>(nodes.size());
    for (const auto& node : nodes) {
        if (node.is_leaf()) continue;
        if (node.feature >= n_features || node.left <= 0 || node.left >= count || node.right <= 0 ||
            node.right >= count)
            throw SchemaError("model file: malformed tree node");
    }
    return TreeModel(std::move(nodes), n_features);
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const json& rows, Eigen::Index cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const auto& row = rows.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) throw SchemaError("model file: ragged weight matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

json body(const TreeModel& m) { return tree_json(m); }

json body(const ForestModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees()) trees.push_back(tree_json(t));
    return {{"n_features", m.n_features()},
            {"feature_subsample", m.feature_subsample()},
            {"bootstrap_seeds", m.bootstrap_seeds()},
            {"trees", trees}};
}

json body(const AdaBoostModel& m) {
    json stumps = json::array();
    for (const auto& t : m.stumps()) stumps.push_back(tree_json(t));
    return {{"n_features", m.n_features()},
            {"learning_rate", m.learning_rate()},
            {"classes", labels_json(m.classes())},
            {"stumps", stumps}};
}

json body(const SvmModel& m) {
    json info = json::array();
    for (const auto& f : m.fit_info())
        info.push_back({{"epochs", f.epochs}, {"converged", f.converged}, {"objective", f.objective}});
    std::vector<double> bias(m.bias().data(), m.bias().data() + m.bias().size());
    return {{"n_features", m.n_features()},
            {"C", m.C()},
            {"kernel", "linear"},
            {"classes", labels_json(m.classes())},
            {"weights", matrix_json(m.weights())},
            {"bias", bias},
            {"fit_info", info}};
}

}  // namespace

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::DecisionTree: return "decision_tree";
        case ModelKind::RandomForest: return "random_forest";
        case ModelKind::AdaBoost: return "adaboost";
        case ModelKind::Svm: return "svm";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "decision_tree" || name == "dt") return ModelKind::DecisionTree;
    if (name == "random_forest" || name == "rf") return ModelKind::RandomForest;
    if (name == "adaboost" || name == "ab") return ModelKind::AdaBoost;
    if (name == "svm") return ModelKind::Svm;
    throw ConfigError("unknown model '" + std::string(name) + "'");
}

ModelKind kind_of(const AnyModel& model) { return static_cast<ModelKind>(model.index()); }

std::string serialize_model(const AnyModel& model) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["model"] = to_string(kind_of(model));
    j["params"] = std::visit([](const auto& m) { return body(m); }, model);
    return j.dump(1);
}

AnyModel deserialize_model(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion)
            throw SchemaError("unsupported model format version " + j.at("format_version").dump());
        const auto& p = j.at("params");
        switch (parse_model_kind(j.at("model").get<std::string>())) {
            case ModelKind::DecisionTree: return tree_from(p);
            case ModelKind::RandomForest: {
                std::vector<TreeModel> trees;
                for (const auto& t : p.at("trees")) trees.push_back(tree_from(t));
                return ForestModel(std::move(trees), p.at("feature_subsample").get<int>(),
                                   p.at("bootstrap_seeds").get<std::vector<std::uint64_t>>(),
                                   p.at("n_features").get<Eigen::Index>());
            }
            case ModelKind::AdaBoost: {
                std::vector<TreeModel> stumps;
                for (const auto& t : p.at("stumps")) stumps.push_back(tree_from(t));
                return AdaBoostModel(std::move(stumps), labels_from(p.at("classes")),
                                     p.at("learning_rate").get<double>(), p.at("n_features").get<Eigen::Index>());
            }
            case ModelKind::Svm: {
                const auto d = p.at("n_features").get<Eigen::Index>();
                auto classes = labels_from(p.at("classes"));
                auto W = matrix_from(p.at("weights"), d);
                auto b = p.at("bias").get<std::vector<double>>();
                if (W.rows() != static_cast<Eigen::Index>(classes.size()) && !(classes.size() == 1 && W.rows() == 1))
                    throw SchemaError("model file: weight rows do not match classes");
                if (b.size() != static_cast<std::size_t>(W.rows())) throw SchemaError("model file: bias length");
                std::vector<SvmFitInfo> info;
                for (const auto& f : p.at("fit_info"))
                    info.push_back({f.at("epochs").get<int>(), f.at("converged").get<bool>(),
                                    f.at("objective").get<double>()});
                return SvmModel(std::move(W), Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())),
                                std::move(classes), p.at("C").get<double>(), std::move(info));
            }
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("model file: ") + e.what());
    } catch (const ConfigError& e) {
        throw SchemaError(std::string("model file: ") + e.what());
    }
    throw SchemaError("model file: unreachable");
}

void save_model(const AnyModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << serialize_model(model) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

AnyModel load_model(const std::filesystem::path& path) { return deserialize_model(read_text_file(path)); }

}  // namespace engagelab::baselines
