#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "engagelab/label.hpp"

namespace engagelab {

/// One (question, student response) pair.
struct ResponseRecord {
    std::string id;
    std::string question;
    std::string response;
    std::optional<IcapLabel> gold;
    Split split = Split::Unassigned;

    bool operator==(const ResponseRecord&) const = default;
};

/// Immutable, validated list of records. Construction enforces distinct ids
/// and non-blank question/response text.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::string name, std::string provenance, std::vector<ResponseRecord> records);

    const std::vector<ResponseRecord>& records() const noexcept { return records_; }
    const std::string& name() const noexcept { return name_; }
    const std::string& provenance() const noexcept { return provenance_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    const ResponseRecord* find(std::string_view id) const noexcept;

    /// Records carrying the given split tag, order preserved.
    Dataset filtered(Split split) const;

private:
    std::string name_;
    std::string provenance_;
    std::vector<ResponseRecord> records_;
};

enum class DatasetFormat { Jsonl, Csv };

std::optional<DatasetFormat> parse_dataset_format(std::string_view text) noexcept;

/// Picks the format from the extension (.csv -> CSV, anything else JSONL).
DatasetFormat format_for_path(const std::filesystem::path& path) noexcept;

/// Throws IoError for unreadable files, SchemaError for malformed rows.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
Dataset load_dataset(const std::filesystem::path& path);

void save_dataset(const Dataset& d, const std::filesystem::path& path, DatasetFormat format);

Dataset parse_jsonl_dataset(std::string_view text, std::string name, std::string provenance = {});
Dataset parse_csv_dataset(std::string_view text, std::string name, std::string provenance = {});

/// Canonical JSONL bytes (field order id, question, response, label, split).
std::string to_jsonl(const Dataset& d);
std::string to_csv(const Dataset& d);

struct ClassDistribution {
    LabelCounts counts{};
    std::size_t unlabeled = 0;

    std::size_t labeled() const noexcept { return counts[0] + counts[1] + counts[2]; }
    bool operator==(const ClassDistribution&) const = default;
};

ClassDistribution class_distribution(const Dataset& d,
                                     std::optional<Split> split_filter = std::nullopt);

struct TrainTestSplit {
    Dataset train;
    Dataset test;
};

/// Seeded per-class shuffle; round(class_count * test_fraction) records of each
/// class go to test. Output keeps the input record order within each side.
TrainTestSplit stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed);

/// Exact per-class sample, tagged Split::Subset, input order preserved.
Dataset select_subset(const Dataset& d, const LabelCounts& per_class, std::uint64_t seed);

/// Parses "P=10,A=10,C=7" (names or initials, any order, missing classes = 0).
LabelCounts parse_class_counts(std::string_view text);

// --- synthetic corpus -------------------------------------------------------

enum class SampleStyle {
    /// Each class has its own signature vocabulary; separable under TF-IDF.
    Distinct,
    /// Constructive responses reuse the Active vocabulary, so a bag-of-words
    /// model cannot tell them apart.
    Overlapping,
};

std::optional<SampleStyle> parse_sample_style(std::string_view text) noexcept;

/// Template table behind the generator. Slots are written `{name}` and are
/// filled from `pools`.
struct SampleTemplates {
    struct Pool {
        std::string_view slot;
        std::vector<std::string_view> words;
    };
    std::vector<std::string_view> questions;
    std::array<std::vector<std::string_view>, kNumLabels> responses;
    std::vector<Pool> pools;
};

const SampleTemplates& sample_templates(SampleStyle style);

/// Deterministic synthetic (question, response) pairs in the surface style of
/// each engagement level. Same seed, same bytes.
Dataset generate_sample_corpus(std::uint64_t seed, const LabelCounts& per_class,
                               SampleStyle style = SampleStyle::Distinct);

/// Train 202/203/27 and test 62/66/7 (Passive/Active/Constructive), tagged.
Dataset paper_scale_corpus(std::uint64_t seed, SampleStyle style);

}  // namespace engagelab
