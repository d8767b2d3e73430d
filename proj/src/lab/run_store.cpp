#include "engagelab/lab/run_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <ctime>
#include <fstream>
#include <sstream>

#include "engagelab/digest.hpp"
#include "engagelab/errors.hpp"
#include "engagelab/resources.hpp"

namespace engagelab::lab {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view to_string(RunKind k) noexcept { return k == RunKind::Llm ? "llm" : "baseline"; }

std::size_t RunRecord::transport_errors() const {
    return static_cast<std::size_t>(
        std::count_if(predictions.begin(), predictions.end(), [](const Prediction& p) { return p.error.has_value(); }));
}

std::string records_digest(std::span<const ResponseRecord> records) {
    std::vector<ResponseRecord> copy(records.begin(), records.end());
    for (auto& r : copy) r.split = Split::Unassigned;
    return sha256_hex(to_jsonl(Dataset("digest", "", std::move(copy))));
}

void score_run(RunRecord& run) {
    if (run.records.size() != run.predictions.size())
        throw LengthMismatch("run " + run.id + ": " + std::to_string(run.records.size()) + " records but " +
                             std::to_string(run.predictions.size()) + " predictions");
    std::vector<IcapLabel> gold;
    std::vector<std::optional<IcapLabel>> pred;
    for (std::size_t i = 0; i < run.records.size(); ++i) {
        const auto& r = run.records[i];
        if (!r.gold) throw SchemaError("run " + run.id + ": record has no gold label", r.id);
        if (r.id != run.predictions[i].record_id)
            throw SchemaError("run " + run.id + ": prediction order does not match records", r.id);
        gold.push_back(*r.gold);
        pred.push_back(run.predictions[i].predicted);
    }
    run.confusion = confusion(gold, pred);
    run.metrics = class_metrics(run.confusion);
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[48];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

namespace {

ordered_json label_json(const std::optional<IcapLabel>& l) {
    return l ? ordered_json(std::string(to_string(*l))) : ordered_json(nullptr);
}

std::optional<IcapLabel> label_from(const ordered_json& j) {
    if (j.is_null()) return std::nullopt;
    auto l = parse_label_name(j.get<std::string>());
    if (!l) throw SchemaError("unknown label " + j.dump());
    return l;
}

ordered_json prediction_json(const Prediction& p, const ResponseRecord& r, RunKind kind) {
    ordered_json j;
    j["record_id"] = p.record_id;
    j["gold"] = label_json(r.gold);
    j["predicted"] = label_json(p.predicted);
    j["parse_status"] = to_string(p.parse_status);
    if (kind == RunKind::Llm) {
        j["transport"] = to_string(p.transport);
        j["prompt_digest"] = p.prompt_digest;
        j["reasoning"] = p.reasoning;
        j["raw_completion"] = p.raw_completion;
        ordered_json attempts = ordered_json::array();
        for (const auto& a : p.attempts)
            attempts.push_back({{"prompt_digest", a.prompt_digest},
                                {"source", to_string(a.source)},
                                {"parsed", a.parsed},
                                {"completion", a.completion}});
        j["attempts"] = attempts;
    }
    j["error"] = p.error ? ordered_json(*p.error) : ordered_json(nullptr);
    return j;
}

Prediction prediction_from(const ordered_json& j) {
    Prediction p;
    p.record_id = j.at("record_id").get<std::string>();
    p.predicted = label_from(j.at("predicted"));
    auto status = parse_parse_status(j.at("parse_status").get<std::string>());
    if (!status) throw SchemaError("bad parse_status " + j.at("parse_status").dump(), p.record_id);
    p.parse_status = *status;
    if (j.contains("transport")) {
        p.transport = parse_transport_kind(j.at("transport").get<std::string>()).value_or(TransportKind::Mock);
        p.prompt_digest = j.at("prompt_digest").get<std::string>();
        p.reasoning = j.at("reasoning").get<std::string>();
        p.raw_completion = j.at("raw_completion").get<std::string>();
        for (const auto& a : j.at("attempts"))
            p.attempts.push_back({a.at("prompt_digest").get<std::string>(), a.at("completion").get<std::string>(),
                                  parse_transport_kind(a.at("source").get<std::string>()).value_or(TransportKind::Mock),
                                  a.at("parsed").get<bool>()});
    }
    if (!j.at("error").is_null()) p.error = j.at("error").get<std::string>();
    return p;
}

ordered_json gate_json(const std::optional<GateResult>& g) {
    if (!g) return nullptr;
    return {{"metric", g->metric},
            {"threshold", g->threshold},
            {"value", g->value},
            {"passed", g->passed},
            {"source", g->source}};
}

ordered_json parse_file(const fs::path& path) {
    try {
        return ordered_json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("malformed " + path.string() + ": " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out << bytes;
    out.flush();
    if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace

std::string predictions_jsonl(const RunRecord& run) {
    std::string out;
    for (std::size_t i = 0; i < run.predictions.size(); ++i) {
        out += prediction_json(run.predictions[i], run.records[i], run.kind).dump();
        out += '\n';
    }
    return out;
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_ / "runs", ec);
    if (ec) throw IoError("cannot create run store at " + root_.string() + ": " + ec.message());
}

fs::path RunStore::run_dir(std::string_view id) const { return root_ / "runs" / std::string(id); }

bool RunStore::exists(std::string_view id) const { return fs::exists(run_dir(id) / "run.json"); }

std::vector<std::string> RunStore::list() const {
    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(root_ / "runs"))
        if (e.is_directory() && fs::exists(e.path() / "run.json")) ids.push_back(e.path().filename().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

void RunStore::save(const RunRecord& run) {
    if (run.id.empty() || run.id.find('/') != std::string::npos || run.id == "." || run.id == "..")
        throw ConfigError("invalid run id '" + run.id + "'");
    const auto dir = run_dir(run.id);
    if (fs::exists(dir)) throw ConfigError("run '" + run.id + "' already exists in " + root_.string());

    // written to a scratch directory and renamed so readers never see a partial run
    const auto tmp = root_ / "runs" / (".tmp-" + run.id);
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    write_file(tmp / "config.json", run.config.dump(2) + "\n");
    write_file(tmp / "dataset.jsonl", to_jsonl(Dataset("snapshot", "", run.records)));
    write_file(tmp / "predictions.jsonl", predictions_jsonl(run));
    write_file(tmp / "metrics.json", metrics_to_json(run.confusion, run.metrics));
    if (run.train_metrics) {
        const ConfusionMatrix none;
        write_file(tmp / "train_metrics.json", metrics_to_json(none, *run.train_metrics));
    }
    std::string timings;
    for (const auto& p : run.predictions)
        timings += ordered_json{{"record_id", p.record_id}, {"latency_us", p.latency.count()}}.dump() + "\n";
    write_file(tmp / "timings.jsonl", timings);

    ordered_json meta;
    meta["id"] = run.id;
    meta["kind"] = to_string(run.kind);
    meta["model"] = run.model;
    meta["baseline_run"] = run.baseline_run ? ordered_json(*run.baseline_run) : ordered_json(nullptr);
    meta["evaluation_split"] = to_string(run.evaluation_split);
    meta["dataset_digest"] = run.dataset_digest;
    meta["n_records"] = run.records.size();
    meta["n_failed_parse"] = run.confusion.n_failed_parse;
    meta["transport_errors"] = run.transport_errors();
    meta["started_at"] = run.started_at;
    meta["finished_at"] = run.finished_at;
    meta["gate"] = gate_json(run.gate);
    write_file(tmp / "run.json", meta.dump(2) + "\n");

    fs::rename(tmp, dir);
}

RunRecord RunStore::load(std::string_view id) const {
    const auto dir = run_dir(id);
    if (!exists(id)) throw ConfigError("no run '" + std::string(id) + "' in " + root_.string());
    RunRecord run;
    const auto meta = parse_file(dir / "run.json");
    try {
        run.id = meta.at("id").get<std::string>();
        run.kind = meta.at("kind").get<std::string>() == "llm" ? RunKind::Llm : RunKind::Baseline;
        run.model = meta.at("model").get<std::string>();
        if (!meta.at("baseline_run").is_null()) run.baseline_run = meta.at("baseline_run").get<std::string>();
        run.evaluation_split = parse_split(meta.at("evaluation_split").get<std::string>()).value_or(Split::Unassigned);
        run.dataset_digest = meta.at("dataset_digest").get<std::string>();
        run.started_at = meta.at("started_at").get<std::string>();
        run.finished_at = meta.at("finished_at").get<std::string>();
        if (const auto& g = meta.at("gate"); !g.is_null())
            run.gate = GateResult{g.at("metric").get<std::string>(), g.at("threshold").get<double>(),
                                  g.at("value").get<double>(), g.at("passed").get<bool>(),
                                  g.at("source").get<std::string>()};
        run.config = parse_file(dir / "config.json");
        run.records = load_dataset(dir / "dataset.jsonl", DatasetFormat::Jsonl).records();

        const auto text = read_text_file(dir / "predictions.jsonl");
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line))
            if (!line.empty()) run.predictions.push_back(prediction_from(ordered_json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("run '" + std::string(id) + "' is malformed: " + e.what());
    }
    score_run(run);
    return run;
}

RunStore::Lock::Lock(const fs::path& file) {
    fd_ = ::open(file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file " + file.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw ConfigError("run store is locked by another experiment (" + file.string() + ")");
    }
}

RunStore::Lock::~Lock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

}  // namespace engagelab::lab
