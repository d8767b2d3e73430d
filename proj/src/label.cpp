#include "engagelab/label.hpp"

#include <algorithm>
#include <cctype>

namespace engagelab {

namespace {

std::string lower_trimmed(std::string_view text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    auto last = text.find_last_not_of(" \t\r\n");
    std::string out(text.substr(first, last - first + 1));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::optional<IcapLabel> label_from_code(int c) noexcept {
    if (c < 0 || c >= static_cast<int>(kNumLabels)) return std::nullopt;
    return static_cast<IcapLabel>(c);
}

std::string_view to_string(IcapLabel l) noexcept {
    switch (l) {
        case IcapLabel::Passive: return "Passive";
        case IcapLabel::Active: return "Active";
        case IcapLabel::Constructive: return "Constructive";
    }
    return "?";
}

std::optional<IcapLabel> parse_label_name(std::string_view text) noexcept {
    const auto s = lower_trimmed(text);
    if (s == "passive") return IcapLabel::Passive;
    if (s == "active") return IcapLabel::Active;
    if (s == "constructive") return IcapLabel::Constructive;
    return std::nullopt;
}

std::optional<IcapLabel> parse_label_or_abbrev(std::string_view text) noexcept {
    const auto s = lower_trimmed(text);
    if (s == "p") return IcapLabel::Passive;
    if (s == "a") return IcapLabel::Active;
    if (s == "c") return IcapLabel::Constructive;
    return parse_label_name(s);
}

std::string_view to_string(Split s) noexcept {
    switch (s) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Subset: return "subset";
        case Split::Unassigned: return "unassigned";
    }
    return "?";
}

std::optional<Split> parse_split(std::string_view text) noexcept {
    const auto s = lower_trimmed(text);
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    if (s == "subset") return Split::Subset;
    if (s == "unassigned" || s.empty()) return Split::Unassigned;
    return std::nullopt;
}

}  // namespace engagelab
