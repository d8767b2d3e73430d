// labctl: command-line front end for the engagement-labeling lab.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "engagelab/corpus.hpp"
#include "engagelab/errors.hpp"
#include "engagelab/lab/baseline_runs.hpp"
#include "engagelab/lab/experiment.hpp"
#include "engagelab/lab/report.hpp"
#include "engagelab/lab/run_store.hpp"
#include "engagelab/resources.hpp"

namespace fs = std::filesystem;
using namespace engagelab;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitTransport = 3;
constexpr int kExitGate = 4;

struct Globals {
    std::string config;
    std::string store = "labstore";
    std::uint64_t seed = 0;
    std::string transport;
    std::string format = "md";
    std::string resources;
};

lab::OutputFormat output_format(const Globals& g) {
    auto f = lab::parse_output_format(g.format);
    if (!f) throw ConfigError("--format must be md or json");
    return *f;
}

void print_distribution(const Dataset& d, std::ostream& out) {
    auto line = [&out](std::string_view name, const ClassDistribution& c) {
        out << name << ": Passive " << c.counts[0] << ", Active " << c.counts[1] << ", Constructive " << c.counts[2];
        if (c.unlabeled) out << ", unlabeled " << c.unlabeled;
        out << " (" << c.labeled() + c.unlabeled << " records)\n";
    };
    line("all", class_distribution(d));
    for (auto s : {Split::Train, Split::Test, Split::Subset}) {
        auto c = class_distribution(d, s);
        if (c.labeled() + c.unlabeled > 0) line(to_string(s), c);
    }
}

void write_dataset(const Dataset& d, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << to_jsonl(d);
        return;
    }
    save_dataset(d, out_path, format_for_path(out_path));
    std::cerr << "wrote " << d.size() << " records to " << out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"labctl: run, score and compare engagement-labeling experiments"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Experiment config (JSON)");
    app.add_option("--store", g.store, "Run store directory")->capture_default_str();
    app.add_option("--seed", g.seed, "Seed for splitting, sampling and forests")->capture_default_str();
    app.add_option("--transport", g.transport, "Override the configured transport")
        ->check(CLI::IsMember({"live", "replay", "mock"}));
    app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"md", "json"}))->capture_default_str();
    app.add_option("--resources", g.resources, "Resource directory (stop words, prompt templates)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate a dataset, or generate the synthetic sample corpus");
    std::string ingest_in, ingest_out, ingest_fmt, sample_counts = "P=10,A=10,C=10", sample_style = "distinct";
    bool sample = false, paper_scale = false;
    ingest->add_option("input", ingest_in, "Dataset file (.jsonl or .csv)");
    ingest->add_option("-o,--out", ingest_out, "Write normalized JSONL/CSV here");
    ingest->add_option("--input-format", ingest_fmt, "jsonl or csv (default: from extension)");
    ingest->add_flag("--sample", sample, "Generate the synthetic corpus instead of reading a file");
    ingest->add_option("--per-class", sample_counts, "Synthetic counts, e.g. P=10,A=10,C=7")->capture_default_str();
    ingest->add_option("--style", sample_style, "distinct or overlapping")->capture_default_str();
    ingest->add_flag("--paper-scale", paper_scale, "Synthetic train/test split with the 432/135 class ratios");

    // split
    auto* split = app.add_subcommand("split", "Stratified train/test split");
    std::string split_in, split_out;
    double test_fraction = 0.25;
    split->add_option("input", split_in)->required();
    split->add_option("-o,--out", split_out);
    split->add_option("--test-fraction", test_fraction)->capture_default_str();

    // subset
    auto* subset = app.add_subcommand("subset", "Draw a per-class subset (from the test split when tagged)");
    std::string subset_in, subset_out, subset_counts = "P=10,A=10,C=7";
    subset->add_option("input", subset_in)->required();
    subset->add_option("-o,--out", subset_out);
    subset->add_option("--counts", subset_counts)->capture_default_str();

    // baselines
    auto* base = app.add_subcommand("baselines", "Train and score SVM, RF, DT and AdaBoost on TF-IDF features");
    std::string base_in, base_prefix = "baseline";
    base->add_option("dataset", base_in)->required();
    base->add_option("--prefix", base_prefix, "Run id prefix")->capture_default_str();

    // run
    auto* run = app.add_subcommand("run", "Run an LLM experiment described by --config");
    std::string run_id, run_cache;
    run->add_option("--id", run_id, "Override the config's run id");
    run->add_option("--cache", run_cache, "Override the cache path");

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "Misclassification report for a run");
    std::string diag_id;
    diag->add_option("run", diag_id)->required();

    // compare
    auto* cmp = app.add_subcommand("compare", "Percent change and F1 difference matrices against a baseline run");
    std::string cmp_base;
    std::vector<std::string> cmp_runs;
    cmp->add_option("baseline", cmp_base)->required();
    cmp->add_option("runs", cmp_runs)->required();

    // render
    auto* rend = app.add_subcommand("render", "Metrics table for one or more runs");
    std::vector<std::string> rend_runs;
    rend->add_option("runs", rend_runs)->required();

    // replay
    auto* rep = app.add_subcommand("replay", "Re-run a stored LLM run from a replay cache");
    std::string rep_id, rep_cache, rep_new;
    int rep_parallel = 1;
    rep->add_option("run", rep_id)->required();
    rep->add_option("--cache", rep_cache, "Cache file (default: the run's configured cache)");
    rep->add_option("--id", rep_new, "Id of the new run (default: <run>-replay)");
    rep->add_option("--parallel", rep_parallel)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        if (!g.resources.empty()) set_resource_dir(g.resources);
        const auto format = output_format(g);

        if (*ingest) {
            Dataset d;
            if (sample) {
                auto style = parse_sample_style(sample_style);
                if (!style) throw ConfigError("--style must be distinct or overlapping");
                d = paper_scale ? paper_scale_corpus(g.seed, *style)
                                : generate_sample_corpus(g.seed, parse_class_counts(sample_counts), *style);
            } else {
                if (ingest_in.empty()) throw ConfigError("ingest needs an input file or --sample");
                if (ingest_fmt.empty()) {
                    d = load_dataset(ingest_in);
                } else {
                    auto f = parse_dataset_format(ingest_fmt);
                    if (!f) throw ConfigError("--input-format must be jsonl or csv");
                    d = load_dataset(ingest_in, *f);
                }
            }
            print_distribution(d, std::cerr);
            if (!ingest_out.empty() || sample) write_dataset(d, ingest_out);
            return 0;
        }
        if (*split) {
            auto d = load_dataset(split_in);
            auto parts = stratified_split(d, test_fraction, g.seed);
            std::vector<ResponseRecord> all = parts.train.records();
            all.insert(all.end(), parts.test.records().begin(), parts.test.records().end());
            Dataset out(d.name(), d.provenance(), std::move(all));
            print_distribution(out, std::cerr);
            write_dataset(out, split_out);
            return 0;
        }
        if (*subset) {
            auto d = load_dataset(subset_in);
            auto pool = d.filtered(Split::Test);
            auto picked = select_subset(pool.empty() ? d : pool, parse_class_counts(subset_counts), g.seed);
            print_distribution(picked, std::cerr);
            write_dataset(picked, subset_out);
            return 0;
        }

        lab::RunStore store(g.store);

        if (*base) {
            lab::BaselineOptions opts;
            opts.seed = g.seed;
            opts.id_prefix = base_prefix;
            auto runs = lab::run_baselines(base_in, store, opts);
            std::cout << lab::render(runs, format);
            return 0;
        }
        if (*run) {
            if (g.config.empty()) throw ConfigError("run needs --config <experiment.json>");
            auto config = lab::load_experiment_config(g.config);
            if (!run_id.empty()) config.id = run_id;
            if (!run_cache.empty()) config.cache = run_cache;
            if (!g.transport.empty()) config.transport = *parse_transport_kind(g.transport);
            if (config.transport == TransportKind::Replay && !config.cache)
                throw ConfigError("replay transport needs a cache path");
            auto record = lab::run_experiment(config, store);
            std::cout << lab::render(std::span(&record, 1), format);
            if (format == lab::OutputFormat::Markdown && record.gate)
                std::cout << "\nGate (" << record.gate->metric << " >= " << record.gate->threshold << ", "
                          << record.gate->source << "): " << (record.gate->passed ? "passed" : "FAILED") << " at "
                          << record.gate->value << "\n";
            if (record.transport_errors() > 0) {
                std::cerr << record.transport_errors() << " records failed in transport; see predictions.jsonl\n";
                return kExitTransport;
            }
            return record.gate && !record.gate->passed ? kExitGate : 0;
        }
        if (*diag) {
            std::cout << lab::render(lab::diagnose(store.load(diag_id)), format);
            return 0;
        }
        if (*cmp) {
            std::cout << lab::render(lab::compare(store, cmp_base, cmp_runs), format);
            return 0;
        }
        if (*rend) {
            std::vector<lab::RunRecord> runs;
            for (const auto& id : rend_runs) runs.push_back(store.load(id));
            std::cout << lab::render(runs, format);
            return 0;
        }
        if (*rep) {
            const auto original = store.load(rep_id);
            fs::path cache = rep_cache;
            if (cache.empty()) {
                const auto& c = original.config.at("experiment").at("cache");
                if (c.is_null()) throw ConfigError("run '" + rep_id + "' has no recorded cache; pass --cache");
                cache = c.get<std::string>();
            }
            auto replayed = lab::replay_run(store, rep_id, cache, rep_new.empty() ? rep_id + "-replay" : rep_new,
                                            rep_parallel);
            std::size_t differing = 0;
            for (std::size_t i = 0; i < replayed.predictions.size(); ++i) {
                const auto& a = original.predictions[i];
                const auto& b = replayed.predictions[i];
                if (a.predicted != b.predicted || a.raw_completion != b.raw_completion) ++differing;
            }
            std::cout << lab::render(std::span(&replayed, 1), format);
            if (replayed.transport_errors() > 0) {
                std::cerr << replayed.transport_errors() << " records missing from the cache\n";
                return kExitTransport;
            }
            if (differing > 0) {
                std::cerr << differing << " predictions differ from run '" << rep_id << "'\n";
                return kExitData;
            }
            std::cerr << "replay of '" << rep_id << "' reproduced all " << replayed.predictions.size()
                      << " predictions\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const SchemaError& e) {
        std::cerr << "data error: " << e.what();
        if (!e.record_id().empty()) std::cerr << " (record " << e.record_id() << ")";
        std::cerr << "\n";
        return kExitData;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
