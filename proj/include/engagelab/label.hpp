#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace engagelab {

/// Three-level cognitive engagement label. Numeric codes follow the coding
/// scheme's score column, and also define the tie-break order everywhere.
enum class IcapLabel : int { Passive = 0, Active = 1, Constructive = 2 };

inline constexpr std::size_t kNumLabels = 3;
inline constexpr std::array<IcapLabel, kNumLabels> kAllLabels{
    IcapLabel::Passive, IcapLabel::Active, IcapLabel::Constructive};

constexpr int code(IcapLabel l) noexcept { return static_cast<int>(l); }
constexpr std::size_t index(IcapLabel l) noexcept { return static_cast<std::size_t>(l); }

std::optional<IcapLabel> label_from_code(int code) noexcept;

/// Canonical name ("Passive", "Active", "Constructive").
std::string_view to_string(IcapLabel l) noexcept;

/// Case-insensitive; accepts exactly the three names, surrounding whitespace ignored.
std::optional<IcapLabel> parse_label_name(std::string_view text) noexcept;

/// Accepts full names or the single-letter abbreviations P/A/C.
std::optional<IcapLabel> parse_label_or_abbrev(std::string_view text) noexcept;

enum class Split { Train, Test, Subset, Unassigned };

std::string_view to_string(Split s) noexcept;
std::optional<Split> parse_split(std::string_view text) noexcept;

/// Per-class counts indexed by label code.
using LabelCounts = std::array<std::size_t, kNumLabels>;

}  // namespace engagelab
