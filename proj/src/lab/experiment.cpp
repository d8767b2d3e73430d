#include "engagelab/lab/experiment.hpp"

#include <algorithm>
#include <set>

#include "engagelab/errors.hpp"
#include "engagelab/resources.hpp"

namespace engagelab::lab {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view to_string(EvaluationSplit s) noexcept {
    switch (s) {
        case EvaluationSplit::Subset: return "subset";
        case EvaluationSplit::Test: return "test";
        case EvaluationSplit::Custom: return "custom";
    }
    return "?";
}

std::string_view to_string(GateMetric m) noexcept { return m == GateMetric::MacroF1 ? "macro_f1" : "accuracy"; }

Split evaluation_split_tag(EvaluationSplit s) {
    switch (s) {
        case EvaluationSplit::Subset: return Split::Subset;
        case EvaluationSplit::Test: return Split::Test;
        case EvaluationSplit::Custom: return Split::Unassigned;
    }
    return Split::Unassigned;
}

namespace {

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_absolute() || base.empty() ? p : base / p; }

template <typename T>
T get_or(const ordered_json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const ordered_json& j, const fs::path& base_dir) {
    ExperimentConfig c;
    try {
        c.id = j.at("id").get<std::string>();
        c.prompt_spec = resolve(j.at("prompt_spec").get<std::string>(), base_dir);
        c.dataset = resolve(j.at("dataset").get<std::string>(), base_dir);

        const auto split = get_or<std::string>(j, "evaluation_split", "subset");
        if (split == "subset")
            c.evaluation_split = EvaluationSplit::Subset;
        else if (split == "test")
            c.evaluation_split = EvaluationSplit::Test;
        else if (split == "custom")
            c.evaluation_split = EvaluationSplit::Custom;
        else
            throw ConfigError("unknown evaluation_split '" + split + "'");

        if (auto s = j.find("subset"); s != j.end() && !s->is_null()) {
            if (s->is_string()) {
                c.subset_counts = parse_class_counts(s->get<std::string>());
            } else {
                LabelCounts counts{};
                for (const auto& [k, v] : s->items()) {
                    auto l = parse_label_or_abbrev(k);
                    if (!l) throw ConfigError("subset: unknown class '" + k + "'");
                    counts[index(*l)] = v.get<std::size_t>();
                }
                c.subset_counts = counts;
            }
        }
        c.custom_ids = get_or<std::vector<std::string>>(j, "records", {});

        if (auto l = j.find("llm"); l != j.end()) {
            c.llm.model_name = get_or<std::string>(*l, "model_name", c.llm.model_name);
            c.llm.temperature = get_or<double>(*l, "temperature", c.llm.temperature);
            c.llm.top_p = get_or<double>(*l, "top_p", c.llm.top_p);
            c.llm.max_output_tokens = get_or<int>(*l, "max_output_tokens", c.llm.max_output_tokens);
            c.llm.request_timeout =
                std::chrono::milliseconds(get_or<long long>(*l, "request_timeout_ms", c.llm.request_timeout.count()));
            c.llm.max_parallel = get_or<int>(*l, "max_parallel", c.llm.max_parallel);
            c.llm.base_url = get_or<std::string>(*l, "base_url", "");
            if (l->contains("api_key"))
                throw ConfigError("API keys are read from ENGAGELAB_API_KEY only; remove llm.api_key from the config");
        }
        c.llm.validate();

        const auto transport = get_or<std::string>(j, "transport", "mock");
        auto kind = parse_transport_kind(transport);
        if (!kind) throw ConfigError("unknown transport '" + transport + "'");
        c.transport = *kind;
        if (auto cache = j.find("cache"); cache != j.end() && !cache->is_null())
            c.cache = resolve(cache->get<std::string>(), base_dir);

        if (auto m = j.find("mock"); m != j.end() && !m->is_null()) {
            c.mock_script = m->is_string() ? read_text_file(resolve(m->get<std::string>(), base_dir)) : m->dump();
        }
        if (auto b = j.find("baseline_run"); b != j.end() && !b->is_null()) c.baseline_run = b->get<std::string>();
        if (auto g = j.find("gate"); g != j.end() && !g->is_null()) {
            const auto metric = get_or<std::string>(*g, "metric", "macro_f1");
            if (metric == "macro_f1")
                c.gate.metric = GateMetric::MacroF1;
            else if (metric == "accuracy")
                c.gate.metric = GateMetric::Accuracy;
            else
                throw ConfigError("unknown gate metric '" + metric + "'");
            if (auto t = g->find("threshold"); t != g->end() && !t->is_null()) c.gate.threshold = t->get<double>();
        }
        c.seed = get_or<std::uint64_t>(j, "seed", 0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
    if (c.transport == TransportKind::Replay && !c.cache) throw ConfigError("replay transport needs a cache path");
    return c;
}

ordered_json ExperimentConfig::to_json() const {
    ordered_json j;
    j["id"] = id;
    j["prompt_spec"] = prompt_spec.string();
    j["dataset"] = dataset.string();
    j["evaluation_split"] = to_string(evaluation_split);
    if (subset_counts) j["subset"] = {{"P", (*subset_counts)[0]}, {"A", (*subset_counts)[1]}, {"C", (*subset_counts)[2]}};
    if (!custom_ids.empty()) j["records"] = custom_ids;
    j["llm"] = {{"model_name", llm.model_name},
                {"temperature", llm.temperature},
                {"top_p", llm.top_p},
                {"max_output_tokens", llm.max_output_tokens},
                {"request_timeout_ms", llm.request_timeout.count()},
                {"max_parallel", llm.max_parallel},
                {"base_url", llm.base_url}};
    j["transport"] = to_string(transport);
    j["cache"] = cache ? ordered_json(cache->string()) : ordered_json(nullptr);
    j["mock"] = mock_script.empty() ? ordered_json(nullptr) : ordered_json::parse(mock_script);
    j["baseline_run"] = baseline_run ? ordered_json(*baseline_run) : ordered_json(nullptr);
    j["gate"] = {{"metric", to_string(gate.metric)},
                 {"threshold", gate.threshold ? ordered_json(*gate.threshold) : ordered_json(nullptr)}};
    j["seed"] = seed;
    return j;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("experiment config " + path.string() + " is not valid JSON: " + e.what());
    }
    return ExperimentConfig::from_json(j, path.parent_path());
}

std::vector<ResponseRecord> evaluation_records(const ExperimentConfig& config, const Dataset& d) {
    switch (config.evaluation_split) {
        case EvaluationSplit::Subset: {
            auto tagged = d.filtered(Split::Subset);
            if (!tagged.empty()) return tagged.records();
            if (!config.subset_counts)
                throw SplitMismatch("dataset has no subset records and the config gives no subset counts");
            auto pool = d.filtered(Split::Test);
            if (pool.empty()) throw SplitMismatch("dataset has no test records to draw a subset from");
            return select_subset(pool, *config.subset_counts, config.seed).records();
        }
        case EvaluationSplit::Test: {
            auto test = d.filtered(Split::Test);
            if (test.empty()) throw SplitMismatch("dataset has no test records");
            return test.records();
        }
        case EvaluationSplit::Custom: {
            if (config.custom_ids.empty()) return d.records();
            std::vector<ResponseRecord> out;
            for (const auto& id : config.custom_ids) {
                const auto* r = d.find(id);
                if (!r) throw SchemaError("custom split names unknown record", id);
                out.push_back(*r);
            }
            return out;
        }
    }
    return {};
}

std::shared_ptr<Transport> make_transport(const ExperimentConfig& config, const Dataset& d) {
    switch (config.transport) {
        case TransportKind::Replay:
            if (!config.cache || !fs::exists(*config.cache))
                throw ConfigError("replay cache not found: " + (config.cache ? config.cache->string() : "<none>"));
            return std::make_shared<ReplayTransport>(std::make_shared<ReplayCache>(*config.cache));
        case TransportKind::Mock: {
            auto script = config.mock_script.empty() ? gold_script(d) : script_from_json(config.mock_script, d);
            std::shared_ptr<Transport> mock = std::make_shared<MockTransport>(std::move(script));
            if (config.cache) return record_mode(std::make_shared<ReplayCache>(*config.cache), mock);
            return mock;
        }
        case TransportKind::Live: {
            std::shared_ptr<Transport> live = LiveTransport::from_environment(config.llm);
            if (config.cache) return record_mode(std::make_shared<ReplayCache>(*config.cache), live);
            return live;
        }
    }
    throw ConfigError("unsupported transport");
}

GateResult evaluate_gate(const GateConfig& gate, const ClassMetrics& metrics, const RunStore& store,
                         const std::optional<std::string>& baseline_run) {
    auto pick = [&](const ClassMetrics& m) { return gate.metric == GateMetric::MacroF1 ? m.macro_f1 : m.accuracy; };
    GateResult g;
    g.metric = std::string(to_string(gate.metric));
    g.value = pick(metrics);
    if (gate.threshold) {
        g.threshold = *gate.threshold;
        g.source = "threshold";
    } else if (baseline_run) {
        g.threshold = pick(store.load(*baseline_run).metrics);
        g.source = "baseline:" + *baseline_run;
    } else {
        g.threshold = 0.0;
        g.source = "none";
    }
    g.passed = g.value >= g.threshold;
    return g;
}

namespace {

RunRecord execute(const ExperimentConfig& config, const PromptSpec& spec, const Dataset& d, RunStore& store,
                  Transport& transport, ordered_json snapshot, std::optional<Split> split_tag = std::nullopt) {
    if (store.exists(config.id)) throw ConfigError("run '" + config.id + "' already exists");
    if (config.baseline_run && !store.exists(*config.baseline_run))
        throw ConfigError("baseline run '" + *config.baseline_run + "' not found");

    RunRecord run;
    run.id = config.id;
    run.kind = RunKind::Llm;
    run.model = "LLM";
    run.baseline_run = config.baseline_run;
    run.evaluation_split = split_tag.value_or(evaluation_split_tag(config.evaluation_split));
    run.records = evaluation_records(config, d);
    for (const auto& r : run.records)
        if (!r.gold) throw SchemaError("evaluation record has no gold label", r.id);
    run.dataset_digest = records_digest(run.records);
    run.config = std::move(snapshot);

    run.started_at = utc_timestamp();
    run.predictions = classify_batch(spec, run.records, config.llm, transport);
    run.finished_at = utc_timestamp();
    score_run(run);
    run.gate = evaluate_gate(config.gate, run.metrics, store, config.baseline_run);
    store.save(run);
    return run;
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& config, RunStore& store, std::shared_ptr<Transport> transport) {
    auto lock = store.lock();
    const auto spec = load_prompt_spec(config.prompt_spec);
    const auto dataset = load_dataset(config.dataset);
    if (!transport) transport = make_transport(config, dataset);

    ordered_json snapshot;
    snapshot["experiment"] = config.to_json();
    snapshot["prompt_spec"] = ordered_json::parse(prompt_spec_to_json(spec));
    return execute(config, spec, dataset, store, *transport, std::move(snapshot));
}

RunRecord replay_run(RunStore& store, std::string_view run_id, const fs::path& cache, std::string new_id,
                     int max_parallel) {
    auto lock = store.lock();
    const auto original = store.load(run_id);
    if (original.kind != RunKind::Llm) throw ConfigError("only LLM runs can be replayed");

    auto config = ExperimentConfig::from_json(original.config.at("experiment"), {});
    config.id = std::move(new_id);
    config.transport = TransportKind::Replay;
    config.cache = cache;
    config.llm.max_parallel = max_parallel;
    config.evaluation_split = EvaluationSplit::Custom;
    config.custom_ids.clear();
    const auto spec = parse_prompt_spec(original.config.at("prompt_spec").dump(), {});

    // evaluate exactly the recorded records, whatever the dataset file says now
    const Dataset snapshot_data("replay-" + original.id, "run " + original.id, original.records);
    ReplayTransport transport(std::make_shared<ReplayCache>(cache));

    ordered_json snapshot;
    snapshot["experiment"] = config.to_json();
    snapshot["prompt_spec"] = original.config.at("prompt_spec");
    snapshot["replay_of"] = original.id;
    return execute(config, spec, snapshot_data, store, transport, std::move(snapshot), original.evaluation_split);
}

}  // namespace engagelab::lab
