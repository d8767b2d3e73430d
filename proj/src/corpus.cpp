#include "engagelab/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "csv.hpp"
#include "engagelab/errors.hpp"
#include "engagelab/rng.hpp"
#include "json.hpp"

namespace engagelab {

namespace {

bool is_blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading dataset file '" + path.string() + "'");
    return ss.str();
}

IcapLabel require_label(std::string_view text, const std::string& id) {
    if (auto l = parse_label_name(text)) return *l;
    throw SchemaError("record '" + id + "': invalid label '" + std::string(text) +
                          "' (expected Passive, Active or Constructive)",
                      id);
}

Split require_split(std::string_view text, const std::string& id) {
    if (auto s = parse_split(text)) return *s;
    throw SchemaError("record '" + id + "': invalid split '" + std::string(text) + "'", id);
}

}  // namespace

Dataset::Dataset(std::string name, std::string provenance, std::vector<ResponseRecord> records)
    : name_(std::move(name)), provenance_(std::move(provenance)), records_(std::move(records)) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(records_.size());
    for (const auto& r : records_) {
        if (r.id.empty()) throw SchemaError("record with empty id");
        if (!seen.insert(r.id).second) throw SchemaError("duplicate id '" + r.id + "'", r.id);
        if (is_blank(r.question))
            throw SchemaError("record '" + r.id + "': empty question", r.id);
        if (is_blank(r.response))
            throw SchemaError("record '" + r.id + "': empty response", r.id);
    }
}

const ResponseRecord* Dataset::find(std::string_view id) const noexcept {
    auto it = std::find_if(records_.begin(), records_.end(),
                           [&](const ResponseRecord& r) { return r.id == id; });
    return it == records_.end() ? nullptr : &*it;
}

Dataset Dataset::filtered(Split split) const {
    std::vector<ResponseRecord> out;
    std::copy_if(records_.begin(), records_.end(), std::back_inserter(out),
                 [&](const ResponseRecord& r) { return r.split == split; });
    return Dataset(name_ + "/" + std::string(to_string(split)), provenance_, std::move(out));
}

std::optional<DatasetFormat> parse_dataset_format(std::string_view text) noexcept {
    if (text == "jsonl" || text == "json") return DatasetFormat::Jsonl;
    if (text == "csv") return DatasetFormat::Csv;
    return std::nullopt;
}

DatasetFormat format_for_path(const std::filesystem::path& path) noexcept {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".csv" ? DatasetFormat::Csv : DatasetFormat::Jsonl;
}

Dataset parse_jsonl_dataset(std::string_view text, std::string name, std::string provenance) {
    std::vector<ResponseRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        auto line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (is_blank(line)) continue;

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
        }
        if (!obj.is_object())
            throw SchemaError("line " + std::to_string(line_no) + ": expected a JSON object");

        auto field = [&](const char* key, const std::string& id) -> std::string {
            auto it = obj.find(key);
            if (it == obj.end() || !it->is_string())
                throw SchemaError("line " + std::to_string(line_no) + ": missing string field '" +
                                      key + "'",
                                  id);
            return it->get<std::string>();
        };

        ResponseRecord r;
        r.id = field("id", {});
        r.question = field("question", r.id);
        r.response = field("response", r.id);
        if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
            if (!it->is_string()) throw SchemaError("record '" + r.id + "': label must be a string", r.id);
            r.gold = require_label(it->get<std::string>(), r.id);
        }
        if (auto it = obj.find("split"); it != obj.end() && !it->is_null()) {
            if (!it->is_string()) throw SchemaError("record '" + r.id + "': split must be a string", r.id);
            r.split = require_split(it->get<std::string>(), r.id);
        }
        records.push_back(std::move(r));
        if (pos > text.size()) break;
    }
    return Dataset(std::move(name), std::move(provenance), std::move(records));
}

Dataset parse_csv_dataset(std::string_view text, std::string name, std::string provenance) {
    std::vector<csv::Row> rows;
    try {
        rows = csv::parse(text);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("CSV: ") + e.what());
    }
    if (rows.empty()) throw SchemaError("CSV: missing header row");

    const auto& header = rows.front();
    auto column = [&](std::string_view key, bool required) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            std::string h = header[i];
            if (i == 0 && h.rfind("\xEF\xBB\xBF", 0) == 0) h.erase(0, 3);
            if (h == key) return i;
        }
        if (required) throw SchemaError("CSV: missing column '" + std::string(key) + "'");
        return std::nullopt;
    };
    const auto c_id = *column("id", true);
    const auto c_question = *column("question", true);
    const auto c_response = *column("response", true);
    const auto c_label = *column("label", true);
    const auto c_split = column("split", false);

    std::vector<ResponseRecord> records;
    records.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != header.size())
            throw SchemaError("CSV row " + std::to_string(i + 1) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(row.size()),
                              row.empty() ? std::string{} : row[c_id < row.size() ? c_id : 0]);
        ResponseRecord r;
        r.id = row[c_id];
        r.question = row[c_question];
        r.response = row[c_response];
        if (!is_blank(row[c_label])) r.gold = require_label(row[c_label], r.id);
        if (c_split) r.split = require_split(row[*c_split], r.id);
        records.push_back(std::move(r));
    }
    return Dataset(std::move(name), std::move(provenance), std::move(records));
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    const auto text = read_file(path);
    auto name = path.stem().string();
    return format == DatasetFormat::Csv ? parse_csv_dataset(text, std::move(name), path.string())
                                        : parse_jsonl_dataset(text, std::move(name), path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    return load_dataset(path, format_for_path(path));
}

std::string to_jsonl(const Dataset& d) {
    std::string out;
    for (const auto& r : d.records()) {
        nlohmann::ordered_json obj;
        obj["id"] = r.id;
        obj["question"] = r.question;
        obj["response"] = r.response;
        if (r.gold) obj["label"] = std::string(to_string(*r.gold));
        if (r.split != Split::Unassigned) obj["split"] = std::string(to_string(r.split));
        out += obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
        out.push_back('\n');
    }
    return out;
}

std::string to_csv(const Dataset& d) {
    const bool with_split = std::any_of(d.records().begin(), d.records().end(),
                                        [](const ResponseRecord& r) { return r.split != Split::Unassigned; });
    csv::Row header{"id", "question", "response", "label"};
    if (with_split) header.emplace_back("split");
    std::string out = csv::format_row(header);
    for (const auto& r : d.records()) {
        csv::Row row{r.id, r.question, r.response, r.gold ? std::string(to_string(*r.gold)) : ""};
        if (with_split) row.emplace_back(to_string(r.split));
        out += csv::format_row(row);
    }
    return out;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path, DatasetFormat format) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write dataset file '" + path.string() + "'");
    out << (format == DatasetFormat::Csv ? to_csv(d) : to_jsonl(d));
    if (!out) throw IoError("error writing dataset file '" + path.string() + "'");
}

ClassDistribution class_distribution(const Dataset& d, std::optional<Split> split_filter) {
    ClassDistribution dist;
    for (const auto& r : d.records()) {
        if (split_filter && r.split != *split_filter) continue;
        if (r.gold)
            ++dist.counts[index(*r.gold)];
        else
            ++dist.unlabeled;
    }
    return dist;
}

namespace {

std::array<std::vector<std::size_t>, kNumLabels> indices_by_class(const Dataset& d) {
    std::array<std::vector<std::size_t>, kNumLabels> by_class;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& r = d.records()[i];
        if (r.gold) by_class[index(*r.gold)].push_back(i);
    }
    return by_class;
}

}  // namespace

TrainTestSplit stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test fraction must lie in (0, 1)");
    for (const auto& r : d.records())
        if (!r.gold) throw SchemaError("record '" + r.id + "' is unlabeled; cannot stratify", r.id);

    auto by_class = indices_by_class(d);
    std::vector<bool> to_test(d.size(), false);
    for (auto label : kAllLabels) {
        auto& members = by_class[index(label)];
        if (members.empty()) continue;
        if (members.size() < 2)
            throw InsufficientClass("class " + std::string(to_string(label)) +
                                    " has fewer than 2 records");
        Rng rng(mix_seed(seed, 0x5711'0000 + static_cast<std::uint64_t>(code(label))));
        rng.shuffle(std::span(members));
        const auto k = static_cast<std::size_t>(
            std::llround(static_cast<double>(members.size()) * test_fraction));
        for (std::size_t i = 0; i < k; ++i) to_test[members[i]] = true;
    }

    std::vector<ResponseRecord> train, test;
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto r = d.records()[i];
        r.split = to_test[i] ? Split::Test : Split::Train;
        (to_test[i] ? test : train).push_back(std::move(r));
    }
    return {Dataset(d.name() + "/train", d.provenance(), std::move(train)),
            Dataset(d.name() + "/test", d.provenance(), std::move(test))};
}

Dataset select_subset(const Dataset& d, const LabelCounts& per_class, std::uint64_t seed) {
    auto by_class = indices_by_class(d);
    std::vector<bool> chosen(d.size(), false);
    for (auto label : kAllLabels) {
        auto& members = by_class[index(label)];
        const auto want = per_class[index(label)];
        if (want > members.size())
            throw InsufficientClass("requested " + std::to_string(want) + " " +
                                    std::string(to_string(label)) + " records but only " +
                                    std::to_string(members.size()) + " are available");
        Rng rng(mix_seed(seed, 0x5B5E'0000 + static_cast<std::uint64_t>(code(label))));
        rng.shuffle(std::span(members));
        for (std::size_t i = 0; i < want; ++i) chosen[members[i]] = true;
    }
    std::vector<ResponseRecord> out;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!chosen[i]) continue;
        auto r = d.records()[i];
        r.split = Split::Subset;
        out.push_back(std::move(r));
    }
    return Dataset(d.name() + "/subset", d.provenance(), std::move(out));
}

LabelCounts parse_class_counts(std::string_view text) {
    LabelCounts counts{};
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        auto item = text.substr(pos, comma - pos);
        pos = comma + 1;
        if (item.find_first_not_of(' ') == std::string_view::npos) continue;
        auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("class count '" + std::string(item) + "' must look like P=10");
        auto label = parse_label_or_abbrev(item.substr(0, eq));
        if (!label) throw ConfigError("unknown class in '" + std::string(item) + "'");
        const std::string num(item.substr(eq + 1));
        std::size_t used = 0;
        long long v = -1;
        try {
            v = std::stoll(num, &used);
        } catch (const std::exception&) {
        }
        if (v < 0 || num.find_first_not_of(' ', used) != std::string::npos)
            throw ConfigError("invalid count in '" + std::string(item) + "'");
        counts[index(*label)] = static_cast<std::size_t>(v);
    }
    return counts;
}

}  // namespace engagelab
