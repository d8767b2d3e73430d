#include "engagelab/lab/report.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <sstream>

#include "engagelab/errors.hpp"

namespace engagelab::lab {

using nlohmann::ordered_json;

std::optional<OutputFormat> parse_output_format(std::string_view s) noexcept {
    if (s == "md" || s == "markdown") return OutputFormat::Markdown;
    if (s == "json") return OutputFormat::Json;
    return std::nullopt;
}

std::size_t MisclassificationReport::size() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.items.size();
    return n;
}

MisclassificationReport diagnose(const RunRecord& run) {
    std::map<std::pair<int, int>, MisclassificationGroup> cells;
    for (std::size_t i = 0; i < run.predictions.size(); ++i) {
        const auto& p = run.predictions[i];
        const auto& r = run.records[i];
        if (!p.predicted || !r.gold || *p.predicted == *r.gold) continue;
        auto& g = cells[{code(*r.gold), code(*p.predicted)}];
        g.gold = *r.gold;
        g.predicted = *p.predicted;
        g.items.push_back({r.id, r.question, r.response, *r.gold, *p.predicted, p.reasoning});
    }
    MisclassificationReport report;
    report.run_id = run.id;
    for (auto& [key, g] : cells) report.groups.push_back(std::move(g));
    std::stable_sort(report.groups.begin(), report.groups.end(),
                     [](const auto& a, const auto& b) { return a.items.size() > b.items.size(); });
    return report;
}

CompareResult compare(const RunRecord& baseline, std::span<const RunRecord> experiments) {
    for (const auto& e : experiments) {
        if (e.evaluation_split != baseline.evaluation_split)
            throw SplitMismatch("run '" + e.id + "' was evaluated on the " + std::string(to_string(e.evaluation_split)) +
                                " split, baseline '" + baseline.id + "' on " +
                                std::string(to_string(baseline.evaluation_split)));
        if (e.dataset_digest != baseline.dataset_digest)
            throw SplitMismatch("run '" + e.id + "' was evaluated on different records than baseline '" +
                                baseline.id + "'");
    }
    std::vector<NamedMetrics> named;
    for (const auto& e : experiments) named.emplace_back(e.id, e.metrics);

    CompareResult out;
    out.report = percent_change_report(baseline.id, baseline.metrics, named);
    for (auto l : kAllLabels) {
        std::vector<NamedScore> scores{{baseline.id, baseline.metrics[l].f1 * 100.0}};
        for (const auto& e : experiments) scores.emplace_back(e.id, e.metrics[l].f1 * 100.0);
        if (scores.size() >= 2) out.f1_diffs[index(l)] = pairwise_diff_matrix(scores);
    }
    return out;
}

CompareResult compare(const RunStore& store, std::string_view baseline, std::span<const std::string> experiments) {
    const auto base = store.load(baseline);
    std::vector<RunRecord> runs;
    for (const auto& id : experiments) runs.push_back(store.load(id));
    return compare(base, runs);
}

std::string render(const MisclassificationReport& r, OutputFormat f) {
    if (f == OutputFormat::Json) {
        ordered_json j;
        j["run_id"] = r.run_id;
        j["total"] = r.size();
        ordered_json groups = ordered_json::array();
        for (const auto& g : r.groups) {
            ordered_json items = ordered_json::array();
            for (const auto& it : g.items)
                items.push_back({{"record_id", it.record_id},
                                 {"question", it.question},
                                 {"response", it.response},
                                 {"gold", to_string(it.gold)},
                                 {"predicted", to_string(it.predicted)},
                                 {"chain_of_thought", it.reasoning}});
            groups.push_back({{"gold", to_string(g.gold)},
                              {"predicted", to_string(g.predicted)},
                              {"count", g.items.size()},
                              {"items", items}});
        }
        j["groups"] = groups;
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "# Misclassifications: " << r.run_id << "\n\n";
    if (r.groups.empty()) {
        out << "No misclassifications.\n";
        return out.str();
    }
    out << r.size() << " misclassified records in " << r.groups.size() << " cells.\n";
    for (const auto& g : r.groups) {
        out << "\n## Gold " << to_string(g.gold) << ", predicted " << to_string(g.predicted) << " ("
            << g.items.size() << ")\n\n";
        for (const auto& it : g.items) {
            out << "- **" << it.record_id << "**\n";
            out << "  - Question: " << it.question << "\n";
            out << "  - Response: " << it.response << "\n";
            if (!it.reasoning.empty()) {
                auto cot = it.reasoning;
                std::replace(cot.begin(), cot.end(), '\n', ' ');
                out << "  - Chain-of-thought: " << cot << "\n";
            }
        }
    }
    return out.str();
}

std::string render(const CompareResult& r, OutputFormat f) {
    if (f == OutputFormat::Json) {
        ordered_json j;
        j["comparison"] = ordered_json::parse(comparison_to_json(r.report));
        ordered_json diffs;
        for (auto l : kAllLabels)
            if (!r.f1_diffs[index(l)].models.empty())
                diffs[std::string(to_string(l))] = ordered_json::parse(diff_matrix_to_json(r.f1_diffs[index(l)]));
        j["f1_diffs"] = diffs;
        return j.dump(2) + "\n";
    }
    std::string out = render_comparison_markdown(r.report);
    for (auto l : kAllLabels) {
        if (r.f1_diffs[index(l)].models.empty()) continue;
        out += "\n";
        out += render_diff_markdown(r.f1_diffs[index(l)], "F1 differences, " + std::string(to_string(l)) + " (row minus column, points)");
    }
    return out;
}

std::string render(std::span<const RunRecord> runs, OutputFormat f) {
    std::set<std::string> models;
    bool unique = true;
    for (const auto& r : runs) unique = models.insert(r.model).second && unique;
    auto name = [&](const RunRecord& r) { return unique ? r.model : r.id; };

    if (f == OutputFormat::Json) {
        ordered_json a = ordered_json::array();
        for (const auto& r : runs) {
            ordered_json j;
            j["run_id"] = r.id;
            j["model"] = r.model;
            j["evaluation_split"] = to_string(r.evaluation_split);
            j["metrics"] = ordered_json::parse(metrics_to_json(r.confusion, r.metrics));
            j["gate"] = r.gate ? ordered_json{{"metric", r.gate->metric},
                                              {"threshold", r.gate->threshold},
                                              {"value", r.gate->value},
                                              {"passed", r.gate->passed},
                                              {"source", r.gate->source}}
                               : ordered_json(nullptr);
            a.push_back(j);
        }
        return a.dump(2) + "\n";
    }
    // one class table per run of equal supports, headers would lie otherwise
    auto supports = [](const RunRecord& r) {
        std::array<long long, kNumLabels> s{};
        for (auto l : kAllLabels) s[index(l)] = r.metrics[l].support;
        return s;
    };
    std::ostringstream out;
    std::vector<NamedMetrics> rows;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        rows.emplace_back(name(runs[i]), runs[i].metrics);
        if (i + 1 == runs.size() || supports(runs[i + 1]) != supports(runs[i])) {
            if (out.tellp() > 0) out << '\n';
            out << render_metrics_markdown(rows);
            rows.clear();
        }
    }
    out << "\n| Model | Accuracy | Macro F1 | Failed parses |\n|---|---|---|---|\n";
    for (const auto& r : runs)
        out << "| " << name(r) << " | " << render_percent(r.metrics.accuracy) << " | "
            << render_percent(r.metrics.macro_f1) << " | " << r.metrics.n_failed_parse << " |\n";
    return out.str();
}

}  // namespace engagelab::lab
