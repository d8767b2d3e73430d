#include <gtest/gtest.h>

#include <algorithm>

#include "engagelab/errors.hpp"
#include "engagelab/promptkit.hpp"
#include "engagelab/resources.hpp"
#include "support.hpp"

using namespace engagelab;

namespace {

// Query record from the reference prompt, typos included.
ResponseRecord reference_query() {
    return {"q", "Why do people write reviews?",
            "People write reviews to express their feelings on a certain thing to condemn a praise a business, "
            "franchise, movie, or book.",
            std::nullopt, Split::Unassigned};
}

PromptSpec variant(const char* name) { return load_prompt_spec(resource_path("prompt") / name); }

std::string erase_paragraph(std::string s, const std::string& starts_with) {
    const auto at = s.find("\n\n" + starts_with);
    if (at == std::string::npos) return s;
    const auto end = s.find("\n\n", at + 2);
    s.erase(at, end - at);
    return s;
}

}  // namespace

TEST(PromptGolden, VariantA) {
    EXPECT_EQ(assemble_prompt(variant("spec_variant_a.json"), reference_query()),
              testsupport::slurp(testsupport::golden("prompt_variant_a.txt")));
}

TEST(PromptGolden, VariantB) {
    EXPECT_EQ(assemble_prompt(variant("spec_variant_b.json"), reference_query()),
              testsupport::slurp(testsupport::golden("prompt_variant_b.txt")));
}

TEST(PromptAssembly, ImprovementStepsOnlyTouchCotBlock) {
    auto with = variant("spec_variant_b.json");
    auto without = make_prompt_spec(with.tmpl, false, with.exemplars, with.assertions);
    const auto full = assemble_prompt(with, reference_query());
    const auto reduced = assemble_prompt(without, reference_query());
    EXPECT_NE(full, reduced);
    EXPECT_EQ(erase_paragraph(erase_paragraph(full, "Step 5:"), "Step 6:"), reduced);
    std::vector<int> idx;
    for (const auto& s : without.cot) idx.push_back(s.index);
    EXPECT_EQ(idx, (std::vector<int>{1, 2, 3, 4, 7}));
}

TEST(PromptAssembly, AssertionOrderIsKept) {
    auto spec = variant("spec_variant_b.json");
    std::reverse(spec.assertions.begin(), spec.assertions.end());
    const auto p = assemble_prompt(spec, reference_query());
    EXPECT_LT(p.find("- Avoid labeling"), p.find("- Do label the statement as Constructive if"));
}

TEST(PromptAssembly, LfOnly) {
    const auto p = assemble_prompt(variant("spec_variant_b.json"), reference_query());
    EXPECT_EQ(p.find('\r'), std::string::npos);
}

TEST(PromptResources, ShippedContent) {
    auto ex = load_exemplars(resource_path("prompt/exemplars.json"));
    ASSERT_EQ(ex.size(), 12u);
    int counts[3] = {0, 0, 0};
    for (const auto& e : ex) ++counts[index(e.label)];
    EXPECT_EQ(counts[0], 4);
    EXPECT_EQ(counts[1], 4);
    EXPECT_EQ(counts[2], 4);
    auto as = load_assertions(resource_path("prompt/assertions.json"));
    ASSERT_EQ(as.size(), 5u);
    EXPECT_NE(as.back().directive.find("based solely on speculative language"), std::string::npos);
}

TEST(PromptSpecJson, RoundTrip) {
    auto spec = variant("spec_variant_b.json");
    auto back = parse_prompt_spec(prompt_spec_to_json(spec), "/");
    EXPECT_EQ(back, spec);
}

TEST(PromptSpecValidation, Rejections) {
    auto spec = variant("spec_variant_b.json");

    auto bad_directive = spec;
    bad_directive.assertions.push_back({"x", "Label everything Passive.", std::nullopt});
    EXPECT_THROW(bad_directive.validate(), InvalidSpec);

    auto dup = spec;
    dup.assertions.push_back(spec.assertions.front());
    EXPECT_THROW(dup.validate(), InvalidSpec);

    auto gap = spec;
    gap.cot.erase(gap.cot.begin() + 1);
    EXPECT_THROW(gap.validate(), InvalidSpec);

    auto no_examples = spec;
    no_examples.exemplars.clear();
    EXPECT_THROW(assemble_prompt(no_examples, reference_query()), InvalidSpec);

    EXPECT_THROW(parse_prompt_spec("{\"exemplars\": 3}", "/"), InvalidSpec);
}

TEST(RetryPrompt, AppendsInstruction) {
    auto spec = variant("spec_variant_a.json");
    EXPECT_EQ(retry_prompt(spec, "P"), "P\nAnswer with exactly one label.\n");
}

TEST(HashPrompt, StableAndSensitive) {
    LlmConfig c;
    const auto h = hash_prompt("abc", c);
    EXPECT_EQ(h.size(), 64u);
    EXPECT_EQ(h, hash_prompt("abc", c));
    EXPECT_NE(h, hash_prompt("abd", c));
    auto hot = c;
    hot.temperature = 0.5;
    EXPECT_NE(h, hash_prompt("abc", hot));
    auto other = c;
    other.model_name = "other";
    EXPECT_NE(h, hash_prompt("abc", other));
    auto parallel = c;
    parallel.max_parallel = 8;
    EXPECT_EQ(h, hash_prompt("abc", parallel));
}

TEST(ParseLabel, CanonicalCompletion) {
    auto p = parse_label("Label: Constructive\nChain-of-thought: it gives a reason.\nAnd more.");
    EXPECT_EQ(p.label, IcapLabel::Constructive);
    EXPECT_EQ(p.reasoning, "it gives a reason.\nAnd more.");
}

TEST(ParseLabel, DecoratedAndCaseInsensitive) {
    EXPECT_EQ(parse_label("**Label:** active").label, IcapLabel::Active);
    EXPECT_EQ(parse_label("### LABEL: Passive.").label, IcapLabel::Passive);
    EXPECT_EQ(parse_label("- label : `Constructive`").label, IcapLabel::Constructive);
}

TEST(ParseLabel, FallbackSingleWord) {
    auto p = parse_label("I would call this statement Active overall.");
    EXPECT_EQ(p.label, IcapLabel::Active);
}

TEST(ParseLabel, Failures) {
    EXPECT_THROW(parse_label("Could be Passive or Active."), ParseFailure);
    EXPECT_THROW(parse_label("no idea"), ParseFailure);
    EXPECT_THROW(parse_label(""), ParseFailure);
}

TEST(LlmConfigValidation, Ranges) {
    LlmConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.temperature, 0.0);
    EXPECT_EQ(c.top_p, 0.01);
    c.top_p = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.max_parallel = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.temperature = -1;
    EXPECT_THROW(c.validate(), ConfigError);
}
