#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "engagelab/corpus.hpp"
#include "engagelab/gateway.hpp"
#include "engagelab/metrics.hpp"

namespace engagelab::lab {

enum class RunKind { Llm, Baseline };
std::string_view to_string(RunKind k) noexcept;

struct GateResult {
    std::string metric;  // "macro_f1" or "accuracy"
    double threshold = 0.0;
    double value = 0.0;
    bool passed = true;
    /// "threshold", "baseline:<run id>" or "none".
    std::string source;

    bool operator==(const GateResult&) const = default;
};

/// One persisted experiment. Metrics are derived from the predictions and
/// the gold labels of `records`.
struct RunRecord {
    std::string id;
    RunKind kind = RunKind::Llm;
    /// Display name, e.g. "LLM" or "SVM".
    std::string model;
    nlohmann::ordered_json config;
    std::optional<std::string> baseline_run;
    Split evaluation_split = Split::Test;
    std::string dataset_digest;
    std::vector<ResponseRecord> records;
    std::vector<Prediction> predictions;
    ConfusionMatrix confusion;
    ClassMetrics metrics;
    std::optional<ClassMetrics> train_metrics;
    std::string started_at;
    std::string finished_at;
    std::optional<GateResult> gate;

    std::size_t transport_errors() const;
};

/// Digest of the evaluated records (ids, texts, gold) ignoring split tags.
std::string records_digest(std::span<const ResponseRecord> records);

/// Fills confusion and metrics from predictions and gold labels.
void score_run(RunRecord& run);

std::string utc_timestamp();

/// Deterministic predictions.jsonl bytes (no timing fields).
std::string predictions_jsonl(const RunRecord& run);

/// Directory-per-run store under <root>/runs/<id>. Runs are written once and
/// never modified.
class RunStore {
public:
    explicit RunStore(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path run_dir(std::string_view id) const;
    bool exists(std::string_view id) const;
    std::vector<std::string> list() const;

    /// Throws ConfigError if the id is taken.
    void save(const RunRecord& run);
    RunRecord load(std::string_view id) const;

    /// Exclusive advisory lock on <root>/.lock for the lifetime of the object.
    class Lock {
    public:
        explicit Lock(const std::filesystem::path& file);
        ~Lock();
        Lock(const Lock&) = delete;
        Lock& operator=(const Lock&) = delete;

    private:
        int fd_ = -1;
    };

    Lock lock() const { return Lock(root_ / ".lock"); }

private:
    std::filesystem::path root_;
};

}  // namespace engagelab::lab
