#include "support/fixtures.hpp"

#include "gterms/error.hpp"
#include "gterms/textprep.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace gterms;
using namespace gterms::textprep;
using Set = std::set<std::string>;

TEST(Tokenize, Examples) {
    EXPECT_EQ(tokenize("End-of-life care"), (Set{"end-of-life", "care"}));
    EXPECT_EQ(tokenize("Latina's experience, experience"), (Set{"latina's", "experience"}));
    EXPECT_EQ(tokenize(""), Set{});
    EXPECT_EQ(tokenize("--well-being-- 'quoted' n=19"), (Set{"well-being", "quoted", "n", "19"}));
    EXPECT_EQ(tokenize("women\xE2\x80\x99s health"), (Set{"women's", "health"}));  // typographic apostrophe
    EXPECT_EQ(tokenize("All rights reserved."), (Set{"all", "rights", "reserved"}));
}

TEST(Tokenize, NfcMergesVisuallyIdenticalTerms) {
    EXPECT_EQ(tokenize("caf\xC3\xA9 cafe\xCC\x81"), (Set{"caf\xC3\xA9"}));
}

TEST(Tokenize, SpansPointIntoText) {
    const std::string text = "Nurses' role: end-of-life";
    for (const auto& s : tokenize_spans(text)) {
        const auto surface = text.substr(s.offset, s.length);
        EXPECT_EQ(tokenize(surface), Set{s.term}) << surface;
    }
}

TEST(Tokenize, IdempotentProperty) {
    std::mt19937_64 rng(12);
    const std::vector<std::string> pieces = {"a", "B", "-", "'", " ", ",", "\xC3\xA9", "z9", "--", "\xE2\x80\x99", "\n", "."};
    for (int i = 0; i < 500; ++i) {
        std::string text;
        for (int k = rng() % 30; k > 0; --k) text += pieces[rng() % pieces.size()];
        const auto once = tokenize(text);
        std::string joined;
        for (const auto& t : once) joined += t + " ";
        EXPECT_EQ(tokenize(joined), once) << text;
        for (const auto& t : once) EXPECT_EQ(tokenize(t), Set{t});
    }
}

TEST(Depluralize, ConditionalOnVocabulary) {
    const std::unordered_set<std::string> vocab{"nurse", "nurses", "babies", "class", "bus", "is"};
    EXPECT_EQ(depluralize("nurses", vocab), "nurse");
    EXPECT_EQ(depluralize("babies", vocab), "babies");
    EXPECT_EQ(depluralize("class", vocab), "class");
    EXPECT_EQ(depluralize("women's", vocab), "women's");
    EXPECT_EQ(depluralize("bus", vocab), "bus");  // too short
    EXPECT_EQ(depluralize("babies", vocab, DepluralMode::always), "babie");
    EXPECT_EQ(depluralize("nurses", vocab, DepluralMode::off), "nurses");
    EXPECT_THROW(parse_deplural("sometimes"), ConfigError);
}

namespace {

ingest::ArticleRecord doc(std::string id, std::string title, std::set<std::string> codes = {"1"}) {
    ingest::ArticleRecord r;
    r.article_id = std::move(id);
    r.field_codes = std::move(codes);
    r.title = std::move(title);
    return r;
}

ingest::FieldCatalog catalog() {
    ingest::FieldCatalog c;
    c.add({"1", "One", "X"});
    c.add({"2", "Two", "X"});
    return c;
}

}  // namespace

TEST(TermIndex, IncidenceNotFrequency) {
    GenderLabels labels;
    labels.set("f1", Gender::female);
    labels.set("f2", Gender::female);
    labels.set("u", Gender::unknown);
    const ingest::Corpus c({doc("f1", "a a b"), doc("f2", "a"), doc("u", "a")}, ingest::CorpusMode::deduplicated);
    const auto idx = TermIndex::build(c, labels, catalog());
    EXPECT_EQ(idx.doc_count(), 2u);
    const auto a = *idx.term_id("a");
    EXPECT_EQ(idx.term_count(a, TermIndex::overall, Gender::female), 2u);
    EXPECT_EQ(idx.term_count(*idx.term_id("b"), "1", Gender::female), 1u);
    EXPECT_EQ(idx.term_count(a, "1", Gender::male), 0u);
    EXPECT_EQ(idx.partition_size("1", Gender::female), 2u);
}

TEST(TermIndex, DepluralizesAgainstCorpusVocabulary) {
    GenderLabels labels;
    labels.set("a", Gender::female);
    labels.set("b", Gender::male);
    const ingest::Corpus c({doc("a", "Nurses and babies"), doc("b", "a nurse")}, ingest::CorpusMode::deduplicated);
    const auto idx = TermIndex::build(c, labels, catalog());
    EXPECT_TRUE(idx.term_id("nurse"));
    EXPECT_FALSE(idx.term_id("nurses"));
    EXPECT_TRUE(idx.term_id("babies"));
    EXPECT_EQ(idx.term_count(*idx.term_id("nurse"), TermIndex::overall, Gender::female), 1u);
}

TEST(TermIndex, StoplistRemovesTerms) {
    GenderLabels labels;
    labels.set("a", Gender::female);
    TextOptions opt;
    opt.stoplist = {"reserved"};
    const ingest::Corpus c({doc("a", "All rights reserved")}, ingest::CorpusMode::deduplicated);
    const auto idx = TermIndex::build(c, labels, catalog(), opt);
    EXPECT_FALSE(idx.term_id("reserved"));
    EXPECT_TRUE(idx.term_id("rights"));
}

TEST(TermIndex, UnknownFieldCodeIsError) {
    GenderLabels labels;
    labels.set("a", Gender::female);
    const ingest::Corpus c({doc("a", "x", {"9"})}, ingest::CorpusMode::deduplicated);
    EXPECT_THROW(TermIndex::build(c, labels, catalog()), DataError);
}

TEST(TermIndex, PerFieldInputIsDeduplicated) {
    GenderLabels labels;
    labels.set("a", Gender::female);
    const ingest::Corpus c({doc("a", "x", {"1"}), doc("a", "x", {"2"})}, ingest::CorpusMode::per_field);
    const auto idx = TermIndex::build(c, labels, catalog());
    EXPECT_EQ(idx.doc_count(), 1u);
    EXPECT_EQ(idx.partition_size("1", Gender::female), 1u);
    EXPECT_EQ(idx.partition_size("2", Gender::female), 1u);
    EXPECT_EQ(idx.partition_size(TermIndex::overall, Gender::female), 1u);
}

TEST(TermIndex, Table1CountsRoundTrip) {
    const auto fx = testkit::table1_corpus();
    const auto idx = TermIndex::build(fx.corpus, fx.labels, fx.catalog);
    EXPECT_EQ(idx.partition_size(testkit::kTable1Field, Gender::female), testkit::kTable1Female);
    EXPECT_EQ(idx.partition_size(testkit::kTable1Field, Gender::male), testkit::kTable1Male);
    for (const auto& row : testkit::kTable1) {
        const auto id = idx.term_id(row.term);
        ASSERT_TRUE(id) << row.term;
        EXPECT_EQ(idx.term_count(*id, testkit::kTable1Field, Gender::female), row.female) << row.term;
        EXPECT_EQ(idx.term_count(*id, testkit::kTable1Field, Gender::male), row.male) << row.term;
    }
}

TEST(TermIndex, PermutationInvariantAndBounded) {
    const auto fx = testkit::table1_corpus(3);
    const auto base = TermIndex::build(fx.corpus, fx.labels, fx.catalog);
    std::mt19937_64 rng(21);
    auto records = fx.corpus.records();
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(records.begin(), records.end(), rng);
        const auto idx = TermIndex::build(ingest::Corpus(records, ingest::CorpusMode::deduplicated), fx.labels, fx.catalog);
        EXPECT_EQ(idx.snapshot(), base.snapshot());
    }
    for (const auto& scope : {std::string(TermIndex::overall), std::string(testkit::kTable1Field)})
        for (const auto& tc : base.scope_terms(scope)) {
            EXPECT_LE(tc.female, base.partition_size(scope, Gender::female));
            EXPECT_LE(tc.male, base.partition_size(scope, Gender::male));
        }
}

TEST(TermIndex, SnapshotReloadReproducesCounts) {
    const auto fx = testkit::table1_corpus();
    const auto idx = TermIndex::build(fx.corpus, fx.labels, fx.catalog);
    const auto back = TermIndex::from_snapshot(nlohmann::json::parse(idx.snapshot().dump()));
    EXPECT_EQ(back.snapshot(), idx.snapshot());
    for (std::uint32_t t = 0; t < idx.terms().size(); ++t)
        for (Gender g : {Gender::female, Gender::male})
            EXPECT_EQ(back.term_count(t, testkit::kTable1Field, g), idx.term_count(t, testkit::kTable1Field, g));
    auto bad = idx.snapshot();
    bad["version"] = 99;
    EXPECT_THROW(TermIndex::from_snapshot(bad), DataError);
}

TEST(TermIndex, UnknownScopeIsNotFound) {
    const auto fx = testkit::table1_corpus();
    const auto idx = TermIndex::build(fx.corpus, fx.labels, fx.catalog);
    EXPECT_THROW(idx.scope_terms("0000"), NotFoundError);
}
