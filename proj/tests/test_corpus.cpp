#include <gtest/gtest.h>

#include <set>

#include "engagelab/corpus.hpp"
#include "engagelab/errors.hpp"
#include "support.hpp"

using namespace engagelab;

namespace {

ResponseRecord rec(std::string id, IcapLabel l, std::string response = "some answer") {
    return {std::move(id), "Why?", std::move(response), l, Split::Unassigned};
}

Dataset labeled(std::size_t p, std::size_t a, std::size_t c) {
    std::vector<ResponseRecord> rs;
    auto add = [&](std::size_t n, IcapLabel l, const char* tag) {
        for (std::size_t i = 0; i < n; ++i) rs.push_back(rec(std::string(tag) + std::to_string(i), l));
    };
    add(p, IcapLabel::Passive, "p");
    add(a, IcapLabel::Active, "a");
    add(c, IcapLabel::Constructive, "c");
    return Dataset("t", "", std::move(rs));
}

}  // namespace

TEST(Label, NamesAndCodes) {
    EXPECT_EQ(to_string(IcapLabel::Constructive), "Constructive");
    EXPECT_EQ(parse_label_name("  active "), IcapLabel::Active);
    EXPECT_EQ(parse_label_name("Act"), std::nullopt);
    EXPECT_EQ(parse_label_or_abbrev("c"), IcapLabel::Constructive);
    EXPECT_EQ(label_from_code(2), IcapLabel::Constructive);
    EXPECT_EQ(label_from_code(3), std::nullopt);
    EXPECT_EQ(parse_split("subset"), Split::Subset);
}

TEST(Dataset, RejectsDuplicateIds) {
    EXPECT_THROW(Dataset("d", "", {rec("x", IcapLabel::Passive), rec("x", IcapLabel::Active)}), SchemaError);
}

TEST(Dataset, RejectsBlankResponse) {
    try {
        Dataset("d", "", {rec("r1", IcapLabel::Passive, "   ")});
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.record_id(), "r1");
    }
}

TEST(Dataset, JsonlRoundTrip) {
    const std::string text =
        R"({"id":"1","question":"Q?","response":"R, with \"quotes\"\nand a newline","label":"Active","split":"test"})"
        "\n"
        R"({"id":"2","question":"Q2","response":"R2"})"
        "\n";
    auto d = parse_jsonl_dataset(text, "x");
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d.records()[0].gold, IcapLabel::Active);
    EXPECT_EQ(d.records()[0].split, Split::Test);
    EXPECT_FALSE(d.records()[1].gold.has_value());
    auto again = parse_jsonl_dataset(to_jsonl(d), "x");
    EXPECT_EQ(again.records(), d.records());
    EXPECT_EQ(to_jsonl(again), to_jsonl(d));
}

TEST(Dataset, CsvRoundTripThroughFiles) {
    testsupport::TempDir tmp;
    auto d = labeled(2, 2, 2);
    save_dataset(d, tmp / "d.csv", DatasetFormat::Csv);
    save_dataset(d, tmp / "d.jsonl", DatasetFormat::Jsonl);
    EXPECT_EQ(load_dataset(tmp / "d.csv").records(), d.records());
    EXPECT_EQ(load_dataset(tmp / "d.jsonl").records(), d.records());
}

TEST(Dataset, CsvQuotedFields) {
    const std::string text = "id,question,response,label\n1,\"Why, though?\",\"He said \"\"hi\"\"\nthere\",Passive\n";
    auto d = parse_csv_dataset(text, "c");
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d.records()[0].question, "Why, though?");
    EXPECT_EQ(d.records()[0].response, "He said \"hi\"\nthere");
}

TEST(Dataset, MalformedInputIsSchemaError) {
    EXPECT_THROW(parse_jsonl_dataset("{not json}\n", "x"), SchemaError);
    EXPECT_THROW(parse_jsonl_dataset(R"({"id":"1","question":"q","response":"r","label":"Bored"})", "x"),
                 SchemaError);
    EXPECT_THROW(parse_csv_dataset("id,question,label\n1,q,Active\n", "x"), SchemaError);
    EXPECT_THROW(load_dataset("/nonexistent/file.jsonl"), IoError);
}

TEST(Dataset, ClassDistribution) {
    auto d = labeled(3, 2, 1);
    auto dist = class_distribution(d);
    EXPECT_EQ(dist.counts, (LabelCounts{3, 2, 1}));
    EXPECT_EQ(dist.labeled(), 6u);
}

TEST(Split, StratifiedCountsAndCoverage) {
    auto d = labeled(40, 40, 8);
    auto s = stratified_split(d, 0.25, 7);
    EXPECT_EQ(class_distribution(s.test).counts, (LabelCounts{10, 10, 2}));
    EXPECT_EQ(class_distribution(s.train).counts, (LabelCounts{30, 30, 6}));
    std::set<std::string> ids;
    for (const auto& r : s.train.records()) {
        EXPECT_EQ(r.split, Split::Train);
        ids.insert(r.id);
    }
    for (const auto& r : s.test.records()) {
        EXPECT_EQ(r.split, Split::Test);
        EXPECT_TRUE(ids.insert(r.id).second);
    }
    EXPECT_EQ(ids.size(), d.size());
}

TEST(Split, SameSeedSameSplit) {
    auto d = labeled(20, 20, 5);
    EXPECT_EQ(to_jsonl(stratified_split(d, 0.3, 11).test), to_jsonl(stratified_split(d, 0.3, 11).test));
    EXPECT_NE(to_jsonl(stratified_split(d, 0.3, 11).test), to_jsonl(stratified_split(d, 0.3, 12).test));
}

TEST(Split, Errors) {
    EXPECT_THROW(stratified_split(labeled(5, 5, 1), 0.25, 0), InsufficientClass);
    EXPECT_THROW(stratified_split(labeled(5, 5, 5), 1.0, 0), ConfigError);
}

TEST(Subset, ExactCountsPreserveOrder) {
    auto d = labeled(30, 30, 9);
    auto s = select_subset(d, {10, 10, 7}, 3);
    EXPECT_EQ(class_distribution(s).counts, (LabelCounts{10, 10, 7}));
    std::size_t last = 0;
    for (const auto& r : s.records()) {
        EXPECT_EQ(r.split, Split::Subset);
        std::size_t pos = 0;
        while (d.records()[pos].id != r.id) ++pos;
        EXPECT_GE(pos, last);
        last = pos;
    }
    EXPECT_THROW(select_subset(d, {10, 10, 10}, 3), InsufficientClass);
}

TEST(Subset, ParseClassCounts) {
    EXPECT_EQ(parse_class_counts("P=10,A=10,C=7"), (LabelCounts{10, 10, 7}));
    EXPECT_EQ(parse_class_counts("Constructive=2, passive=1"), (LabelCounts{1, 0, 2}));
    EXPECT_THROW(parse_class_counts("X=1"), ConfigError);
    EXPECT_THROW(parse_class_counts("P10"), ConfigError);
}

TEST(SampleCorpus, DeterministicAndSized) {
    auto a = generate_sample_corpus(5, {4, 3, 2});
    auto b = generate_sample_corpus(5, {4, 3, 2});
    EXPECT_EQ(to_jsonl(a), to_jsonl(b));
    EXPECT_EQ(class_distribution(a).counts, (LabelCounts{4, 3, 2}));
    EXPECT_NE(to_jsonl(a), to_jsonl(generate_sample_corpus(6, {4, 3, 2})));
}

TEST(SampleCorpus, PaperScaleShape) {
    auto d = paper_scale_corpus(1, SampleStyle::Overlapping);
    EXPECT_EQ(class_distribution(d, Split::Train).counts, (LabelCounts{202, 203, 27}));
    EXPECT_EQ(class_distribution(d, Split::Test).counts, (LabelCounts{62, 66, 7}));
    EXPECT_EQ(d.size(), 567u);
}
