#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "engagelab/gateway.hpp"
#include "engagelab/lab/run_store.hpp"

namespace engagelab::lab {

enum class EvaluationSplit { Subset, Test, Custom };
std::string_view to_string(EvaluationSplit s) noexcept;

enum class GateMetric { MacroF1, Accuracy };
std::string_view to_string(GateMetric m) noexcept;

struct GateConfig {
    GateMetric metric = GateMetric::MacroF1;
    /// Fixed benchmark; when empty the baseline run's value is used.
    std::optional<double> threshold;
};

struct ExperimentConfig {
    std::string id;
    std::filesystem::path prompt_spec;
    std::filesystem::path dataset;
    EvaluationSplit evaluation_split = EvaluationSplit::Subset;
    /// Drawn from the test split when the dataset carries no subset tags.
    std::optional<LabelCounts> subset_counts;
    /// Custom split: these ids, or every record when empty.
    std::vector<std::string> custom_ids;
    LlmConfig llm;
    TransportKind transport = TransportKind::Mock;
    /// Replay source, or record target for live and mock.
    std::optional<std::filesystem::path> cache;
    /// Mock script JSON (see script_from_json); gold answers when empty.
    std::string mock_script;
    std::optional<std::string> baseline_run;
    GateConfig gate;
    std::uint64_t seed = 0;

    /// Paths relative to `base_dir` are resolved against it.
    static ExperimentConfig from_json(const nlohmann::ordered_json& j, const std::filesystem::path& base_dir);
    nlohmann::ordered_json to_json() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Records evaluated by a config, in dataset order.
std::vector<ResponseRecord> evaluation_records(const ExperimentConfig& config, const Dataset& d);
Split evaluation_split_tag(EvaluationSplit s);

/// Transport described by the config: mock, replay, or live, wrapped for
/// recording when a cache is configured.
std::shared_ptr<Transport> make_transport(const ExperimentConfig& config, const Dataset& d);

/// Computes the gate against a fixed threshold, the baseline run, or passes.
GateResult evaluate_gate(const GateConfig& gate, const ClassMetrics& metrics, const RunStore& store,
                         const std::optional<std::string>& baseline_run);

/// Runs, scores, gates and persists an experiment. A supplied transport
/// replaces the configured one.
RunRecord run_experiment(const ExperimentConfig& config, RunStore& store,
                         std::shared_ptr<Transport> transport = nullptr);

/// Re-executes a stored LLM run from its frozen snapshot through a replay
/// cache and stores the result as `new_id`.
RunRecord replay_run(RunStore& store, std::string_view run_id, const std::filesystem::path& cache,
                     std::string new_id, int max_parallel = 1);

}  // namespace engagelab::lab
