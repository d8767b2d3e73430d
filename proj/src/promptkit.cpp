#include "engagelab/promptkit.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "engagelab/digest.hpp"
#include "engagelab/errors.hpp"
#include "engagelab/resources.hpp"

namespace engagelab {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidSpec(what + " is not valid JSON: " + e.what());
    }
}

std::string str_field(const json& j, const char* key, const std::string& what) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw InvalidSpec(what + ": missing string field '" + key + "'");
    return it->get<std::string>();
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

IcapLabel label_field(const json& j, const std::string& what) {
    const auto name = str_field(j, "label", what);
    auto label = parse_label_name(name);
    if (!label) throw InvalidSpec(what + ": unknown label '" + name + "'");
    return *label;
}

std::vector<Exemplar> exemplars_from(const json& a, const std::string& what) {
    if (!a.is_array()) throw InvalidSpec(what + ": exemplars must be an array");
    std::vector<Exemplar> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto where = what + " exemplar " + std::to_string(i);
        const auto& e = a[i];
        out.push_back({str_field(e, "question", where), str_field(e, "response", where), label_field(e, where),
                       str_field(e, "reasoning", where)});
    }
    return out;
}

std::vector<Assertion> assertions_from(const json& a, const std::string& what) {
    if (!a.is_array()) throw InvalidSpec(what + ": assertions must be an array");
    std::vector<Assertion> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto where = what + " assertion " + std::to_string(i);
        const auto& e = a[i];
        Assertion as{str_field(e, "id", where), str_field(e, "directive", where), std::nullopt};
        if (auto t = e.find("targets"); t != e.end() && !t->is_null()) {
            std::set<IcapLabel> targets;
            for (const auto& v : *t) {
                auto l = v.is_string() ? parse_label_name(v.get<std::string>()) : std::nullopt;
                if (!l) throw InvalidSpec(where + ": bad target " + v.dump());
                targets.insert(*l);
            }
            as.targets = std::move(targets);
        }
        out.push_back(std::move(as));
    }
    return out;
}

// Inline array, or a path relative to base_dir.
json inline_or_file(const json& v, const std::filesystem::path& base_dir) {
    if (!v.is_string()) return v;
    const auto path = base_dir / v.get<std::string>();
    return parse_json(read_text_file(path), path.string());
}

bool label_char(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

constexpr std::string_view kDecoration = "*_#>-`~ \t";

std::string_view strip_decoration(std::string_view s) {
    const auto b = s.find_first_not_of(kDecoration);
    if (b == std::string_view::npos) return {};
    s.remove_prefix(b);
    return s;
}

// Value after a "<key>:" prefix on a decorated line, or nullopt.
std::optional<std::string_view> keyed_value(std::string_view line, std::string_view key) {
    auto s = strip_decoration(line);
    if (s.size() < key.size() || lower(s.substr(0, key.size())) != key) return std::nullopt;
    s.remove_prefix(key.size());
    const auto colon = s.find_first_not_of("*_` \t");
    if (colon == std::string_view::npos || s[colon] != ':') return std::nullopt;
    s.remove_prefix(colon + 1);
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

}  // namespace

void LlmConfig::validate() const {
    if (model_name.empty()) throw ConfigError("llm: model name is empty");
    if (!(temperature >= 0.0)) throw ConfigError("llm: temperature must be >= 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("llm: top_p must be in (0, 1]");
    if (max_parallel < 1) throw ConfigError("llm: max_parallel must be >= 1");
    if (max_output_tokens < 1) throw ConfigError("llm: max_output_tokens must be >= 1");
}

namespace {

PromptTemplate template_from(const json& j);

}  // namespace

PromptTemplate parse_prompt_template(std::string_view json_text) {
    return template_from(parse_json(json_text, "prompt template"));
}

namespace {

PromptTemplate template_from(const json& j) {
    const std::string what = "prompt template";
    PromptTemplate t;
    t.version = str_field(j, "template_version", what);
    t.task_header = str_field(j, "task_header", what);
    t.instructions_preamble = str_field(j, "instructions_preamble", what);
    for (const auto& s : j.at("steps")) t.steps.push_back({s.at("index").get<int>(), s.at("text").get<std::string>()});
    t.improvement_steps = j.value("improvement_steps", std::vector<int>{5, 6});
    t.query_preamble = str_field(j, "query_preamble", what);
    const auto& slots = j.at("output_slots");
    t.label_slot = str_field(slots, "label", what);
    t.cot_slot = str_field(slots, "chain_of_thought", what);
    t.few_shot_preamble = str_field(j, "few_shot_preamble", what);
    t.assertion_preamble = str_field(j, "assertion_preamble", what);
    t.retry_instruction = str_field(j, "retry_instruction", what);
    for (std::size_t i = 0; i < t.steps.size(); ++i)
        if (t.steps[i].index != static_cast<int>(i) + 1) throw InvalidSpec("prompt template: steps must be numbered 1..n");
    return t;
}

json template_json(const PromptTemplate& t) {
    json steps = json::array();
    for (const auto& s : t.steps) steps.push_back({{"index", s.index}, {"text", s.text}});
    return {{"template_version", t.version},
            {"task_header", t.task_header},
            {"instructions_preamble", t.instructions_preamble},
            {"steps", steps},
            {"improvement_steps", t.improvement_steps},
            {"query_preamble", t.query_preamble},
            {"output_slots", {{"label", t.label_slot}, {"chain_of_thought", t.cot_slot}}},
            {"few_shot_preamble", t.few_shot_preamble},
            {"assertion_preamble", t.assertion_preamble},
            {"retry_instruction", t.retry_instruction}};
}

}  // namespace

PromptTemplate load_prompt_template(const std::filesystem::path& path) {
    return parse_prompt_template(read_text_file(path));
}

PromptTemplate load_prompt_template_version(std::string_view version) {
    return load_prompt_template(resource_path("prompt") / ("template_" + std::string(version) + ".json"));
}

std::vector<CotStep> build_general_cot(const PromptTemplate& tmpl, bool include_improvement_steps) {
    std::vector<CotStep> out;
    for (const auto& s : tmpl.steps) {
        const bool improvement = std::find(tmpl.improvement_steps.begin(), tmpl.improvement_steps.end(), s.index) !=
                                 tmpl.improvement_steps.end();
        if (improvement && !include_improvement_steps) continue;
        out.push_back(s);
    }
    return out;
}

std::vector<CotStep> build_general_cot(bool include_improvement_steps) {
    static const PromptTemplate tmpl = load_prompt_template_version("v1");
    return build_general_cot(tmpl, include_improvement_steps);
}

void PromptSpec::validate() const {
    // contiguous 1..n, except that the improvement steps may be absent together
    std::vector<int> expected;
    for (const auto& s : tmpl.steps) expected.push_back(s.index);
    std::vector<int> got;
    for (const auto& s : cot) got.push_back(s.index);
    std::vector<int> without = expected;
    std::erase_if(without, [&](int i) {
        return std::find(tmpl.improvement_steps.begin(), tmpl.improvement_steps.end(), i) != tmpl.improvement_steps.end();
    });
    if (got != expected && got != without) throw InvalidSpec("prompt spec: chain-of-thought steps are not contiguous");
    for (const auto& s : cot)
        if (blank(s.text)) throw InvalidSpec("prompt spec: empty text for step " + std::to_string(s.index));

    for (std::size_t i = 0; i < exemplars.size(); ++i) {
        const auto& e = exemplars[i];
        if (blank(e.question) || blank(e.response) || blank(e.reasoning))
            throw InvalidSpec("prompt spec: exemplar " + std::to_string(i) + " has an empty field");
    }
    std::set<std::string, std::less<>> ids;
    for (const auto& a : assertions) {
        if (blank(a.directive)) throw InvalidSpec("prompt spec: assertion '" + a.id + "' has no directive");
        if (!a.directive.starts_with("Do") && !a.directive.starts_with("Avoid"))
            throw InvalidSpec("prompt spec: assertion '" + a.id + "' must start with \"Do\" or \"Avoid\"");
        if (!ids.insert(a.id).second) throw InvalidSpec("prompt spec: duplicate assertion id '" + a.id + "'");
    }
}

PromptSpec make_prompt_spec(PromptTemplate tmpl, bool include_improvement_steps,
                            std::vector<Exemplar> exemplars, std::vector<Assertion> assertions) {
    PromptSpec spec;
    spec.task_header = tmpl.task_header;
    spec.include_improvement_steps = include_improvement_steps;
    spec.cot = build_general_cot(tmpl, include_improvement_steps);
    spec.tmpl = std::move(tmpl);
    spec.exemplars = std::move(exemplars);
    spec.assertions = std::move(assertions);
    spec.validate();
    return spec;
}

std::vector<Exemplar> load_exemplars(const std::filesystem::path& path) {
    return exemplars_from(parse_json(read_text_file(path), path.string()), path.string());
}

std::vector<Assertion> load_assertions(const std::filesystem::path& path) {
    return assertions_from(parse_json(read_text_file(path), path.string()), path.string());
}

PromptSpec parse_prompt_spec(std::string_view json_text, const std::filesystem::path& base_dir) {
    const auto j = parse_json(json_text, "prompt spec");
    if (!j.is_object()) throw InvalidSpec("prompt spec must be a JSON object");
    const auto version = j.value("template_version", std::string("v1"));
    PromptTemplate tmpl;
    if (auto t = j.find("template"); t == j.end())
        tmpl = load_prompt_template_version(version);
    else if (t->is_object())
        tmpl = template_from(*t);
    else
        tmpl = load_prompt_template(base_dir / t->get<std::string>());
    const bool improvement = j.value("include_improvement_steps", true);
    auto exemplars = exemplars_from(inline_or_file(j.value("exemplars", json::array()), base_dir), "prompt spec");
    auto assertions = assertions_from(inline_or_file(j.value("assertions", json::array()), base_dir), "prompt spec");
    auto spec = make_prompt_spec(std::move(tmpl), improvement, std::move(exemplars), std::move(assertions));
    if (auto h = j.find("task_header"); h != j.end()) spec.task_header = h->get<std::string>();
    return spec;
}

std::string prompt_spec_to_json(const PromptSpec& spec) {
    json ex = json::array();
    for (const auto& e : spec.exemplars)
        ex.push_back({{"question", e.question},
                      {"response", e.response},
                      {"label", std::string(to_string(e.label))},
                      {"reasoning", e.reasoning}});
    json as = json::array();
    for (const auto& a : spec.assertions) {
        json targets = nullptr;
        if (a.targets) {
            targets = json::array();
            for (auto l : *a.targets) targets.push_back(std::string(to_string(l)));
        }
        as.push_back({{"id", a.id}, {"directive", a.directive}, {"targets", targets}});
    }
    json j = {{"template_version", spec.tmpl.version},
              {"template", template_json(spec.tmpl)},
              {"task_header", spec.task_header},
              {"include_improvement_steps", spec.include_improvement_steps},
              {"exemplars", ex},
              {"assertions", as}};
    return j.dump(2) + "\n";
}

PromptSpec load_prompt_spec(const std::filesystem::path& path) {
    return parse_prompt_spec(read_text_file(path), path.parent_path());
}

std::string assemble_prompt(const PromptSpec& spec, const ResponseRecord& record) {
    if (spec.exemplars.empty()) throw InvalidSpec("prompt spec has no few-shot exemplars");
    const auto& t = spec.tmpl;
    std::string out;
    auto para = [&out](std::string_view s) {
        out += s;
        out += "\n\n";
    };

    para(spec.task_header);
    para(t.instructions_preamble);
    for (const auto& s : spec.cot) para("Step " + std::to_string(s.index) + ": " + s.text);

    out += t.query_preamble + "\n```\n";
    para("Question: " + record.question);
    para("Statement: " + record.response);
    para(t.label_slot);
    out += t.cot_slot + "\n```\n\n";

    out += t.few_shot_preamble + "\n'''\n";
    for (std::size_t i = 0; i < spec.exemplars.size(); ++i) {
        const auto& e = spec.exemplars[i];
        para("Question: " + e.question);
        para("Statement: " + e.response);
        para("Label: " + std::string(to_string(e.label)));
        out += "Reasoning: " + e.reasoning + "\n";
        if (i + 1 < spec.exemplars.size()) out += "\n";
    }
    out += "'''\n";

    if (!spec.assertions.empty()) {
        out += "\n";
        para(t.assertion_preamble);
        for (std::size_t i = 0; i < spec.assertions.size(); ++i) {
            out += "- " + spec.assertions[i].directive + "\n";
            if (i + 1 < spec.assertions.size()) out += "\n";
        }
    }
    return out;
}

std::string retry_prompt(const PromptSpec& spec, std::string_view prompt) {
    return std::string(prompt) + "\n" + spec.tmpl.retry_instruction + "\n";
}

std::string hash_prompt(std::string_view prompt_text, const LlmConfig& config) {
    char num[64];
    std::string canonical = "engagelab-prompt/1\n";
    auto field = [&canonical](std::string_view name, std::string_view value) {
        canonical += name;
        canonical += ' ';
        canonical += std::to_string(value.size());
        canonical += '\n';
        canonical += value;
        canonical += '\n';
    };
    field("model", config.model_name);
    std::snprintf(num, sizeof num, "%.17g", config.temperature);
    field("temperature", num);
    std::snprintf(num, sizeof num, "%.17g", config.top_p);
    field("top_p", num);
    field("prompt", prompt_text);
    return sha256_hex(canonical);
}

ParsedLabel parse_label(std::string_view completion) {
    const auto lines = split_lines(completion);

    auto reasoning_after_cot = [&]() -> std::optional<std::string> {
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (auto v = keyed_value(lines[i], "chain-of-thought")) {
                std::string r(trim(strip_decoration(*v)));
                for (std::size_t k = i + 1; k < lines.size(); ++k) {
                    r += '\n';
                    r += lines[k];
                }
                return std::string(trim(r));
            }
        }
        return std::nullopt;
    };

    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto v = keyed_value(lines[i], "label");
        if (!v) continue;
        auto value = strip_decoration(*v);
        std::size_t n = 0;
        while (n < value.size() && label_char(value[n])) ++n;
        auto label = parse_label_name(value.substr(0, n));
        if (!label) continue;

        if (auto r = reasoning_after_cot()) return {*label, std::move(*r)};
        std::string rest;
        for (std::size_t k = 0; k < lines.size(); ++k) {
            if (k == i) continue;
            rest += lines[k];
            rest += '\n';
        }
        return {*label, std::string(trim(rest))};
    }

    // no usable Label line: accept a single distinct label word anywhere
    std::optional<IcapLabel> found;
    const auto text = lower(completion);
    for (std::size_t i = 0; i < text.size();) {
        if (!label_char(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && label_char(text[j])) ++j;
        if (auto l = parse_label_name(std::string_view(text).substr(i, j - i))) {
            if (found && *found != *l) throw ParseFailure("completion names more than one label");
            found = l;
        }
        i = j;
    }
    if (!found) throw ParseFailure("completion contains no label");
    if (auto r = reasoning_after_cot()) return {*found, std::move(*r)};
    return {*found, std::string(trim(completion))};
}

}  // namespace engagelab
