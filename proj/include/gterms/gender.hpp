#pragma once

#include "gterms/diagnostics.hpp"
#include "gterms/ingest.hpp"
#include "gterms/labels.hpp"
#include "gterms/ratio.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gterms::gender {

struct NameEntry {
    Gender gender = Gender::unknown;
    double monogender_share = 0.0;
};

// Case-folded given name -> gender. Only names used by one gender at least
// `threshold` of the time are stored.
class NameGenderTable {
public:
    explicit NameGenderTable(double threshold = 0.90);

    // CSV with header name,gender,share. Rows below the threshold are rejected
    // and reported through `warnings`.
    static NameGenderTable load(const std::filesystem::path& path, double threshold, Diagnostics* warnings = nullptr);
    static NameGenderTable load(std::istream& in, double threshold, const std::string& source,
                                Diagnostics* warnings = nullptr);

    // Returns false (and stores nothing) when share < threshold.
    bool add(std::string_view name, Gender gender, double share);

    const NameEntry* find(std::string_view name) const;

    double threshold() const { return threshold_; }
    std::size_t size() const { return entries_.size(); }

private:
    std::unordered_map<std::string, NameEntry> entries_;
    double threshold_;
};

// Exact, case-insensitive lookup of the first whitespace-delimited token of
// `given_name`. Initials ("J", "J.") are unknown. Hyphenated names try the
// whole token first, then the segment before the first hyphen.
Gender infer_gender(std::string_view given_name, const NameGenderTable& table);

GenderLabels label_corpus(const ingest::Corpus& corpus, const NameGenderTable& table);

struct ValidationRow {
    std::string article_id;
    Gender manual = Gender::unknown;  // unknown == unresolved
};

struct ValidationSample {
    std::vector<ValidationRow> rows;

    // CSV with header article_id,manual_gender.
    static ValidationSample load(const std::filesystem::path& path);
};

struct ValidationCounts {
    std::size_t manual_male = 0;
    std::size_t manual_female = 0;
    std::size_t auto_male = 0;
    std::size_t auto_female = 0;

    std::size_t manual_resolved() const { return manual_male + manual_female; }
    std::size_t auto_labelled() const { return auto_male + auto_female; }
};

// Pairs each sampled article with its automatic label. Throws DataError if a
// sampled article_id is not in the corpus.
ValidationCounts tally_validation(const ValidationSample& sample, const ingest::Corpus& corpus,
                                  const NameGenderTable& table);

struct CorrectionFactors {
    double male_multiplier = 1.0;
    double female_multiplier = 1.0;
    ValidationCounts counts;

    double multiplier(Gender g) const { return g == Gender::male ? male_multiplier : female_multiplier; }
    nlohmann::json to_json() const;
};

// male = (manual male share) / (automatic male share); female likewise.
// Throws DomainError unless both manual and both automatic counts are >= 1.
CorrectionFactors estimate_correction_factors(const ValidationCounts& counts);

// Global factors with optional per-field overrides.
class FactorTable {
public:
    FactorTable() = default;
    explicit FactorTable(CorrectionFactors global) : global_(global) {}

    void set_field(const std::string& code, CorrectionFactors f) { per_field_[code] = f; }
    const CorrectionFactors& global() const { return global_; }
    const CorrectionFactors& for_field(std::string_view code) const;

private:
    CorrectionFactors global_;
    std::map<std::string, CorrectionFactors, std::less<>> per_field_;
};

// (f_count * female_multiplier) / (m_count * male_multiplier). A zero male
// count yields an infinite ratio rendered "f/0".
Ratio corrected_odds_ratio(std::uint64_t f_count, std::uint64_t m_count, const CorrectionFactors& factors);

// Converts a document-share ratio into an author ratio: multiplies by the
// corpus F/M article ratio for female lists, divides for male lists.
double author_ratio_from_term_ratio(double term_ratio, double overall_fm, Gender list_gender = Gender::female);

}  // namespace gterms::gender
