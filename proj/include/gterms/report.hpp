#pragma once

#include "gterms/analysis.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gterms::report {

enum class Format { tsv, json, markdown };

Format parse_format(std::string_view s);

// A cell keeps its display text; numeric cells also carry the full-precision
// value emitted in JSON.
struct Cell {
    std::string text;
    std::optional<double> number;

    Cell() = default;
    Cell(std::string t) : text(std::move(t)) {}  // NOLINT(google-explicit-constructor)
    Cell(const char* t) : text(t) {}             // NOLINT(google-explicit-constructor)
    Cell(std::string t, double v) : text(std::move(t)), number(v) {}
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string fixed(double v, int decimals);
Cell count_cell(std::uint64_t n);
// "23 (19%)": count and share of the same-gender partition.
std::string count_with_share(std::uint64_t count, std::uint64_t total);

// {"columns": [...], "rows": [{column: value}, ...]} in column order.
nlohmann::ordered_json to_json(const Table& table);
std::string render(const Table& table, Format format);

// Broad rows with their extreme narrow subfields, then narrow rows.
Table field_ratio_table(const analysis::FieldParticipation& ratios);
// Ranked overall list; author_ratio column uses the corpus F/M article ratio.
Table overall_terms_table(const analysis::OverallTermsResult& result, double overall_fm);
// Per-field layout: term, female articles "n (p%)", male articles, chi-square.
Table field_terms_table(const analysis::FieldTopTerms& field);
Table crossfield_table(const analysis::CrossFieldTally& tally, Gender g);
Table kwic_table(const analysis::KwicResult& result);
Table cooccurrence_table(const analysis::CooccurrenceResult& result);

nlohmann::ordered_json kwic_json(const analysis::KwicResult& result);

}  // namespace gterms::report
