#pragma once

// Per-record counting, one class at a time, no matrices.

#include <array>
#include <optional>
#include <vector>

namespace oracle {

struct Scores {
    double precision, recall, f1;
};

inline std::array<Scores, 3> per_class(const std::vector<int>& gold, const std::vector<std::optional<int>>& pred) {
    std::array<Scores, 3> out{};
    for (int c = 0; c < 3; ++c) {
        int tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            if (!pred[i]) continue;
            const bool g = gold[i] == c;
            const bool p = *pred[i] == c;
            if (g && p) ++tp;
            if (!g && p) ++fp;
            if (g && !p) ++fn;
        }
        const double prec = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
        const double rec = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
        const double f1 = prec + rec == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
        out[static_cast<std::size_t>(c)] = {prec, rec, f1};
    }
    return out;
}

inline double accuracy(const std::vector<int>& gold, const std::vector<std::optional<int>>& pred) {
    int right = 0, scored = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (!pred[i]) continue;
        ++scored;
        if (*pred[i] == gold[i]) ++right;
    }
    return scored == 0 ? 0.0 : double(right) / double(scored);
}

}  // namespace oracle
