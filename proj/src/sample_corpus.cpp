#include <cstdio>

#include "engagelab/corpus.hpp"
#include "engagelab/rng.hpp"

namespace engagelab {

namespace {

// Surface styles follow the coding-scheme indicators: Passive responses list
// or restate words, Active responses apply a known idea ("I think ... because
// it is a commonly used word"), Constructive responses form a hypothesis and
// justify it. Every Active template contains "gained"; every Distinct
// Constructive template contains "indicate".

const std::vector<std::string_view> kQuestions{
    "Why do people write reviews?",
    "What features do you think are indicators of positive reviews?",
    "What is one strategy you (as a human) can use to determine if a review is positive or negative?",
    "What is one strategy you can use to determine what features someone has used to build a classification model?",
    "Why do you think the model learned a large positive weight for this feature?",
    "Why do you think the model learned a large negative weight for this feature?",
    "What kinds of reviews can make our world a better place?",
};

const std::vector<std::string_view> kPassive{
    "{s}, {s}, {s}, {s}",
    "{s}, {s}, {s}, {s}, {s}, {s}",
    "Words like {s}, {s}, and {s}.",
    "The words {s} and {s}.",
    "{s} {s} {s}.",
    "It has {s} and {s} in it.",
};

const std::vector<std::string_view> kActive{
    "I think {feat} gained a large amount of weight because it is a {freq} used word.",
    "I think this gained weight because {feat} is a {freq} used word in {place} reviews.",
    "I think {feat} gained weight because people use it {often} when they {verb} a {place}.",
    "You can look at the {obj} and find words that stand out, like {feat}, because they gained weight.",
};

const std::vector<std::string_view> kConstructiveDistinct{
    "I think that the model learned a large {sign} weight for {cfeat} because if you {cact} "
    "then that would indicate that you {cres} because you chose to {cchoice} in the first place.",
    "My hypothesis is that {cfeat} learned a {sign} weight because reviews that mention it "
    "usually indicate {cres2}, so the model connects it with the overall sentiment.",
    "If {cfeat} appears in many {sign} reviews then it would indicate {cres2}, which means the "
    "model infers the opinion from how {cfeat} relates to the experience.",
};

// Word-for-word rearrangements of kActive: identical bags of words, so only
// word order separates the two classes.
const std::vector<std::string_view> kConstructiveOverlapping{
    "Because it is a {freq} used word, I think {feat} gained a large amount of weight.",
    "Because {feat} is a {freq} used word in {place} reviews, I think this gained weight.",
    "Because people use it {often} when they {verb} a {place}, I think {feat} gained weight.",
    "Because they gained weight, you can look at the {obj} and find words like {feat} that stand out.",
};

std::vector<SampleTemplates::Pool> pools() {
    return {
        {"s", {"amazing", "clean", "selection", "try", "regular", "seating", "love", "excellent",
               "greatest", "enjoy", "awesome", "best", "delicious", "terrible", "rude", "cold",
               "slow", "friendly", "tasty", "fresh", "dirty", "bland", "horrible", "perfect",
               "nice", "worst", "great", "bad", "good", "hate"}},
        {"feat", {"service", "price", "menu", "staff", "waiter", "portion", "music", "parking",
                  "dessert", "wifi"}},
        {"freq", {"commonly", "frequently", "widely"}},
        {"place", {"restaurant", "hotel", "movie", "cafe", "store"}},
        {"often", {"a lot", "often", "frequently"}},
        {"verb", {"describe", "rate", "review", "visit"}},
        {"obj", {"data set", "feature graph", "table"}},
        {"sign", {"positive", "negative"}},
        {"cfeat", {"establishment", "visit", "return", "recommendation", "refund", "complaint",
                   "invitation"}},
        {"cact", {"came to an establishment", "returned to a shop", "recommended a venue"}},
        {"cres", {"did like it", "trusted the owners", "valued the experience"}},
        {"cchoice", {"come in", "go back", "pay"}},
        {"cres2", {"satisfaction with the whole experience", "disappointment with the owners",
                   "loyalty toward the business"}},
    };
}

const SampleTemplates kDistinct{kQuestions, {kPassive, kActive, kConstructiveDistinct}, pools()};
const SampleTemplates kOverlapping{kQuestions, {kPassive, kActive, kConstructiveOverlapping}, pools()};

std::string fill(std::string_view tmpl, const SampleTemplates& t, Rng& rng) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find('{', pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        out.append(tmpl.substr(pos, open - pos));
        const auto close = tmpl.find('}', open);
        const auto slot = tmpl.substr(open + 1, close - open - 1);
        for (const auto& pool : t.pools) {
            if (pool.slot == slot) {
                out.append(pool.words[rng.below(pool.words.size())]);
                break;
            }
        }
        pos = close + 1;
    }
    if (!out.empty() && out.front() >= 'a' && out.front() <= 'z') out.front() = static_cast<char>(out.front() - 32);
    return out;
}

}  // namespace

std::optional<SampleStyle> parse_sample_style(std::string_view text) noexcept {
    if (text == "distinct") return SampleStyle::Distinct;
    if (text == "overlapping") return SampleStyle::Overlapping;
    return std::nullopt;
}

const SampleTemplates& sample_templates(SampleStyle style) {
    return style == SampleStyle::Distinct ? kDistinct : kOverlapping;
}

Dataset generate_sample_corpus(std::uint64_t seed, const LabelCounts& per_class, SampleStyle style) {
    const auto& t = sample_templates(style);
    Rng rng(mix_seed(seed, 0xC0'4B05));
    std::vector<ResponseRecord> records;
    for (auto label : kAllLabels) {
        const auto& templates = t.responses[index(label)];
        for (std::size_t i = 0; i < per_class[index(label)]; ++i) {
            ResponseRecord r;
            r.question = std::string(t.questions[rng.below(t.questions.size())]);
            r.response = fill(templates[rng.below(templates.size())], t, rng);
            r.gold = label;
            records.push_back(std::move(r));
        }
    }
    rng.shuffle(std::span(records));
    for (std::size_t i = 0; i < records.size(); ++i) {
        char id[48];
        std::snprintf(id, sizeof id, "syn%llu-%04zu", static_cast<unsigned long long>(seed), i);
        records[i].id = id;
    }
    const char* style_name = style == SampleStyle::Distinct ? "distinct" : "overlapping";
    return Dataset("synthetic-" + std::to_string(seed),
                   std::string("generated (style=") + style_name + ")", std::move(records));
}

Dataset paper_scale_corpus(std::uint64_t seed, SampleStyle style) {
    auto train = generate_sample_corpus(mix_seed(seed, 1), {202, 203, 27}, style);
    auto test = generate_sample_corpus(mix_seed(seed, 2), {62, 66, 7}, style);
    std::vector<ResponseRecord> records;
    for (auto r : train.records()) {
        r.id = "train-" + r.id;
        r.split = Split::Train;
        records.push_back(std::move(r));
    }
    for (auto r : test.records()) {
        r.id = "test-" + r.id;
        r.split = Split::Test;
        records.push_back(std::move(r));
    }
    return Dataset("synthetic-paper-scale-" + std::to_string(seed), train.provenance(),
                   std::move(records));
}

}  // namespace engagelab
