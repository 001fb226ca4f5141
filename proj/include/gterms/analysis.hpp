#pragma once

#include "gterms/diagnostics.hpp"
#include "gterms/gender.hpp"
#include "gterms/ingest.hpp"
#include "gterms/labels.hpp"
#include "gterms/ratio.hpp"
#include "gterms/stats.hpp"
#include "gterms/textprep.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gterms::analysis {

// ---------------------------------------------------------------------------
// Field participation
// ---------------------------------------------------------------------------

struct FieldRatioRow {
    std::string code;  // empty for broad rows
    std::string name;
    std::string broad;
    std::uint64_t f_count = 0;
    std::uint64_t m_count = 0;
    Ratio corrected_ratio;
};

struct BroadFieldRow {
    FieldRatioRow totals;
    std::size_t narrow_fields = 0;
    std::optional<FieldRatioRow> most_female;
    std::optional<FieldRatioRow> most_male;
};

struct FieldParticipation {
    std::vector<BroadFieldRow> broad;   // descending corrected ratio
    std::vector<FieldRatioRow> narrow;  // descending corrected ratio
};

// Counts distinct gendered articles per kept narrow field and per broad
// field (an article counts once per broad field however many of its narrow
// fields fall in it).
FieldParticipation field_participation(const ingest::Corpus& corpus, const GenderLabels& labels,
                                       const gender::FactorTable& factors, const ingest::FieldCatalog& catalog,
                                       const std::set<std::string>& kept_codes);

// ---------------------------------------------------------------------------
// Gendered term lists
// ---------------------------------------------------------------------------

enum class Ordering { chi2, term_ratio };

struct TermEntry {
    std::string term;
    stats::AssociationScore score;  // group 1 = the list's gender
    double share = 0.0;             // a / (a+b)
    double other_share = 0.0;       // c / (c+d)
    Ratio term_ratio;               // share / other_share
    bool bh_significant = false;    // set by overall_gendered_terms
};

struct GenderedTermList {
    Gender gender = Gender::female;
    std::string scope;  // TermIndex::overall or a field code
    Ordering ordering = Ordering::chi2;
    std::vector<TermEntry> entries;
};

// Scores every term of a scope for `g` (g = group 1). Only terms leaning to
// `g` are returned, ordered by chi2 descending then term. Degenerate tables
// are skipped and counted.
struct ScopeScores {
    std::vector<TermEntry> entries;
    std::size_t scored = 0;
    std::size_t degenerate = 0;
};
ScopeScores score_scope(const textprep::TermIndex& index, std::string_view scope, Gender g,
                        stats::CorrectionPolicy policy);

struct OverallParams {
    std::size_t top_n = 1000;
    std::size_t rank_n = 100;
    double alpha = 0.001;
    stats::CorrectionPolicy policy = stats::CorrectionPolicy::auto_yates;
};

struct OverallTermsResult {
    GenderedTermList list;          // top rank_n by term ratio
    std::size_t scored = 0;         // non-degenerate terms
    std::size_t degenerate = 0;
    std::size_t leaning = 0;        // terms leaning to the gender
    std::size_t selected = 0;       // min(top_n, leaning)
    std::size_t bh_rejected = 0;    // among the selected
    std::optional<double> min_significant_chi2;
    Diagnostics warnings;
};

OverallTermsResult overall_gendered_terms(const textprep::TermIndex& index, Gender g, const OverallParams& params = {});

struct FieldTopTerms {
    std::string field;
    std::uint64_t female_docs = 0;
    std::uint64_t male_docs = 0;
    GenderedTermList female;
    GenderedTermList male;
    Diagnostics warnings;
};

// Top k terms per gender by chi2. Throws DataError if the field has articles
// of only one gender.
FieldTopTerms per_field_top_terms(const textprep::TermIndex& index, const std::string& field, std::size_t k = 20,
                                  stats::CorrectionPolicy policy = stats::CorrectionPolicy::auto_yates);

// ---------------------------------------------------------------------------
// Cross-field tally
// ---------------------------------------------------------------------------

struct TallyRow {
    std::string term;
    std::size_t female_fields = 0;
    std::size_t male_fields = 0;
    Gender majority = Gender::unknown;  // unknown on a tie
    double gender_share = 0.0;          // majority lists / total lists

    std::size_t total_fields() const { return female_fields + male_fields; }
};

struct TallyParams {
    std::size_t min_fields = 17;
    double min_share = 0.70;
};

struct CrossFieldTally {
    std::vector<TallyRow> rows;      // every term in any list
    std::vector<TallyRow> selected;  // passing both thresholds
    std::size_t analyzed_fields = 0;
};

// Ordered by total fields desc, share desc, term. Throws ConfigError if
// min_share < 0.5.
CrossFieldTally cross_field_tally(std::span<const FieldTopTerms> per_field, const TallyParams& params = {});

struct TallySignificance {
    std::uint64_t min_doc_frequency = 0;  // lowest corpus frequency among selected terms
    std::size_t eligible_vocab = 0;       // terms at least that frequent
    stats::BinomialModel model;
    stats::UnionBound unadjusted;
    stats::UnionBound adjusted;
};

// Binomial null model for the selected terms; nullopt when nothing is
// selected or the eligible vocabulary is no larger than k.
std::optional<TallySignificance> tally_significance(const CrossFieldTally& tally, const textprep::TermIndex& index,
                                                    std::size_t k, std::size_t min_fields, double overlap = 2.2);

// Fields whose top list for `g` contains the term.
std::set<std::string> biased_fields(std::span<const FieldTopTerms> per_field, std::string_view term, Gender g);

// ---------------------------------------------------------------------------
// Context: KWIC and co-occurrence
// ---------------------------------------------------------------------------

struct KwicSample {
    std::string term;
    std::string article_id;
    std::string text;  // NFC title/abstract/keywords
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (byte offset, byte length)
    Gender gender = Gender::unknown;
    std::vector<std::string> fields;
};

struct KwicQuery {
    std::string term;
    std::size_t n = 30;
    std::uint64_t seed = 0;
    std::optional<std::set<std::string>> fields;  // nullopt: all fields
    std::optional<Gender> gender;
};

struct KwicResult {
    std::vector<KwicSample> samples;  // ordered by article_id
    std::size_t matching = 0;
    Diagnostics warnings;
};

// Seeded uniform sample without replacement. `corpus` supplies the texts.
// Throws NotFoundError if no article in scope contains the term.
KwicResult kwic_sample(const textprep::TermIndex& index, const ingest::Corpus& corpus, const KwicQuery& query);

enum class Baseline { all_other_docs, same_gender_docs };

Baseline parse_baseline(std::string_view s);
std::string_view baseline_name(Baseline b);

struct CooccurrenceRow {
    std::string term;
    stats::AssociationScore score;
    double anchor_share = 0.0;
    double baseline_share = 0.0;
};

struct CooccurrenceQuery {
    std::string anchor;
    Baseline baseline = Baseline::all_other_docs;
    std::optional<Gender> gender;  // restricts the anchor documents; required for same_gender_docs
    stats::CorrectionPolicy policy = stats::CorrectionPolicy::auto_yates;
    std::size_t limit = 0;  // 0 = unlimited
};

struct CooccurrenceResult {
    std::string anchor;
    Baseline baseline = Baseline::all_other_docs;
    std::optional<Gender> gender;
    std::uint64_t anchor_docs = 0;
    std::uint64_t baseline_docs = 0;
    std::vector<CooccurrenceRow> rows;  // chi2 descending, anchor-leaning only
};

// Compares documents containing the anchor with (i) every other document or
// (ii) the other documents of the same gender.
CooccurrenceResult cooccurrence_scan(const textprep::TermIndex& index, const CooccurrenceQuery& query);

}  // namespace gterms::analysis
