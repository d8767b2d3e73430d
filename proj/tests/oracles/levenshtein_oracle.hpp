#pragma once

#include <algorithm>
#include <cstddef>
#include <string_view>

namespace oracle {

// Plain recursion over the three edit operations. Exponential; keep inputs short.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    const std::size_t sub = levenshtein(a.substr(1), b.substr(1)) + (a.front() == b.front() ? 0 : 1);
    const std::size_t del = levenshtein(a.substr(1), b) + 1;
    const std::size_t ins = levenshtein(a, b.substr(1)) + 1;
    return std::min({sub, del, ins});
}

}  // namespace oracle
