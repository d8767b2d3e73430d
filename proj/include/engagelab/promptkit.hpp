#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "engagelab/corpus.hpp"
#include "engagelab/label.hpp"
#include "engagelab/llm_config.hpp"

namespace engagelab {

struct CotStep {
    int index = 0;
    std::string text;

    bool operator==(const CotStep&) const = default;
};

struct Exemplar {
    std::string question;
    std::string response;
    IcapLabel label = IcapLabel::Passive;
    std::string reasoning;

    bool operator==(const Exemplar&) const = default;
};

struct Assertion {
    std::string id;
    std::string directive;
    std::optional<std::set<IcapLabel>> targets;

    bool operator==(const Assertion&) const = default;
};

/// Fixed texts of one template version (resources/prompt/template_<v>.json).
struct PromptTemplate {
    std::string version;
    std::string task_header;
    std::string instructions_preamble;
    std::vector<CotStep> steps;
    std::vector<int> improvement_steps;
    std::string query_preamble;
    std::string label_slot;
    std::string cot_slot;
    std::string few_shot_preamble;
    std::string assertion_preamble;
    std::string retry_instruction;

    bool operator==(const PromptTemplate&) const = default;
};

PromptTemplate parse_prompt_template(std::string_view json_text);
PromptTemplate load_prompt_template(const std::filesystem::path& path);
/// template_<version>.json from the resource directory.
PromptTemplate load_prompt_template_version(std::string_view version);

struct PromptSpec {
    PromptTemplate tmpl;
    std::string task_header;
    bool include_improvement_steps = true;
    std::vector<CotStep> cot;
    std::vector<Exemplar> exemplars;
    std::vector<Assertion> assertions;

    /// Throws InvalidSpec on a broken invariant.
    void validate() const;

    bool operator==(const PromptSpec&) const = default;
};

/// JSON spec file. `exemplars` and `assertions` may be inline arrays or paths
/// relative to the spec file.
PromptSpec load_prompt_spec(const std::filesystem::path& path);
PromptSpec parse_prompt_spec(std::string_view json_text, const std::filesystem::path& base_dir);

/// Self-contained JSON (template, exemplars and assertions inline) that
/// parse_prompt_spec reads back to an equal spec.
std::string prompt_spec_to_json(const PromptSpec& spec);

std::vector<Exemplar> load_exemplars(const std::filesystem::path& path);
std::vector<Assertion> load_assertions(const std::filesystem::path& path);

/// Steps 1-7, or 1-4 and 7 when the improvement steps are off. Step numbers
/// are kept as authored.
std::vector<CotStep> build_general_cot(const PromptTemplate& tmpl, bool include_improvement_steps);
std::vector<CotStep> build_general_cot(bool include_improvement_steps);

/// Builds a spec from template, exemplars and assertions.
PromptSpec make_prompt_spec(PromptTemplate tmpl, bool include_improvement_steps,
                            std::vector<Exemplar> exemplars, std::vector<Assertion> assertions);

/// LF-only prompt text. The record is used as given; callers normalize it first.
std::string assemble_prompt(const PromptSpec& spec, const ResponseRecord& record);

/// Prompt sent again after an unparseable completion.
std::string retry_prompt(const PromptSpec& spec, std::string_view prompt);

/// Hex SHA-256 over prompt bytes, model name, temperature and top_p.
std::string hash_prompt(std::string_view prompt_text, const LlmConfig& config);

struct ParsedLabel {
    IcapLabel label;
    std::string reasoning;

    bool operator==(const ParsedLabel&) const = default;
};

/// Throws ParseFailure when no label, or conflicting label words, are found.
ParsedLabel parse_label(std::string_view completion);

}  // namespace engagelab
