#pragma once

#include "gterms/analysis.hpp"
#include "gterms/config.hpp"
#include "gterms/diagnostics.hpp"
#include "gterms/gender.hpp"
#include "gterms/ingest.hpp"
#include "gterms/labels.hpp"
#include "gterms/textprep.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace gterms::pipeline {

// Step 1 output: the labelled, filtered corpus and its index.
struct Prepared {
    RunConfig config;
    ingest::FormatConfig format;
    ingest::FieldCatalog catalog;
    ingest::Corpus corpus;        // per-field, restricted to kept fields
    ingest::Corpus deduplicated;  // one record per article
    GenderLabels labels;
    gender::FactorTable factors;
    ingest::FieldFilterResult field_filter;
    textprep::TermIndex index;
    Diagnostics diagnostics;
    std::size_t records_read = 0;
    std::size_t row_errors = 0;
    std::size_t after_country_filter = 0;
};

// Throws Error subclasses whose message starts with the failing stage.
Prepared prepare(const RunConfig& config);

// Steps 2-5.
struct Analysis {
    analysis::FieldParticipation ratios;
    double overall_fm = 0.0;  // deduplicated female / male article ratio
    analysis::OverallTermsResult female;
    analysis::OverallTermsResult male;
    std::vector<analysis::FieldTopTerms> per_field;  // ordered by field code
    analysis::CrossFieldTally tally;
    std::optional<analysis::TallySignificance> significance;
    Diagnostics diagnostics;
};

Analysis analyze(const Prepared& prepared);

// Hex SHA-256 of the config echo (minus output_dir) and every input file.
std::string run_id(const RunConfig& config);

struct RunResult {
    std::string run_id;
    std::filesystem::path run_dir;
    Diagnostics diagnostics;
    std::size_t row_errors = 0;
};

// Writes <output_dir>/run-<id>/ and returns its location.
RunResult run_pipeline(const RunConfig& config);

// Field code -> file stem under field_terms/.
std::string field_file_stem(std::string_view code);

// Read-only view of a finished run directory.
class LoadedRun {
public:
    static std::shared_ptr<const LoadedRun> load(const std::filesystem::path& run_dir);

    const std::filesystem::path& dir() const { return dir_; }
    const std::string& run_id() const { return run_id_; }
    const nlohmann::json& report() const { return report_; }
    const nlohmann::json& field_ratios() const { return field_ratios_; }
    const nlohmann::json& overall_terms(Gender g) const;
    const nlohmann::json& crossfield(Gender g) const;
    // nullptr for an unknown field.
    const nlohmann::json* field_terms(std::string_view code) const;
    const ingest::Corpus& corpus() const { return corpus_; }
    const textprep::TermIndex& index() const { return index_; }

    std::size_t k() const;
    stats::CorrectionPolicy policy() const;

    // Per-field top lists, recomputed from the index on first use.
    const std::vector<analysis::FieldTopTerms>& per_field() const;

private:
    std::filesystem::path dir_;
    std::string run_id_;
    nlohmann::json report_;
    nlohmann::json field_ratios_;
    nlohmann::json overall_f_, overall_m_;
    nlohmann::json crossfield_f_, crossfield_m_;
    std::map<std::string, nlohmann::json, std::less<>> field_terms_;
    ingest::Corpus corpus_;
    textprep::TermIndex index_;
    mutable std::once_flag per_field_once_;
    mutable std::vector<analysis::FieldTopTerms> per_field_;
};

// Per-field top terms for every field of the index, computed in parallel and
// merged in field order. Single-gender fields are skipped with a warning.
std::vector<analysis::FieldTopTerms> all_field_top_terms(const textprep::TermIndex& index, std::size_t k,
                                                         stats::CorrectionPolicy policy, Diagnostics* warnings);

}  // namespace gterms::pipeline
