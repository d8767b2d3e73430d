#pragma once

#include <span>
#include <string>
#include <vector>

#include "engagelab/lab/run_store.hpp"

namespace engagelab::lab {

enum class OutputFormat { Markdown, Json };
std::optional<OutputFormat> parse_output_format(std::string_view s) noexcept;

struct MisclassifiedItem {
    std::string record_id;
    std::string question;
    std::string response;
    IcapLabel gold;
    IcapLabel predicted;
    std::string reasoning;
};

struct MisclassificationGroup {
    IcapLabel gold;
    IcapLabel predicted;
    std::vector<MisclassifiedItem> items;
};

/// Off-diagonal records grouped by (gold, predicted), largest group first.
struct MisclassificationReport {
    std::string run_id;
    std::vector<MisclassificationGroup> groups;

    std::size_t size() const;
};

MisclassificationReport diagnose(const RunRecord& run);

struct CompareResult {
    ComparisonReport report;
    /// Per-class F1 differences across baseline and experiments.
    std::array<DiffMatrix, kNumLabels> f1_diffs;
};

/// Throws SplitMismatch unless every run shares the baseline's split and records.
CompareResult compare(const RunRecord& baseline, std::span<const RunRecord> experiments);
CompareResult compare(const RunStore& store, std::string_view baseline, std::span<const std::string> experiments);

std::string render(const MisclassificationReport& r, OutputFormat f);
std::string render(const CompareResult& r, OutputFormat f);
/// Metrics table over one or more runs (one row each).
std::string render(std::span<const RunRecord> runs, OutputFormat f);

}  // namespace engagelab::lab
