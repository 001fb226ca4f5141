#include "gterms/report.hpp"

#include "gterms/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

namespace gterms::report {

Format parse_format(std::string_view s) {
    if (s == "tsv") return Format::tsv;
    if (s == "json") return Format::json;
    if (s == "markdown" || s == "md") return Format::markdown;
    throw ConfigError("format must be tsv, json or markdown, got '" + std::string(s) + "'");
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

Cell count_cell(std::uint64_t n) { return Cell(std::to_string(n), static_cast<double>(n)); }

std::string count_with_share(std::uint64_t count, std::uint64_t total) {
    const double pct = total ? 100.0 * static_cast<double>(count) / static_cast<double>(total) : 0.0;
    return std::to_string(count) + " (" + fixed(pct, 0) + "%)";
}

namespace {

Cell ratio_cell(const Ratio& r) {
    if (r.is_finite()) return Cell(r.render(2), r.value);
    return Cell(r.render(2));
}

Cell chi2_cell(double chi2) { return Cell(fixed(chi2, 1), chi2); }

std::string sanitize(std::string_view text, char bad) {
    std::string out(text);
    for (auto& c : out)
        if (c == bad || c == '\n' || c == '\r' || c == '\t') c = ' ';
    return out;
}

// Counts print without a decimal point; keep them integral in JSON too.
bool is_count(const Cell& c) {
    return !c.text.empty() && std::all_of(c.text.begin(), c.text.end(), [](unsigned char ch) { return std::isdigit(ch); }) &&
           std::abs(*c.number) < 9.0e15 && *c.number == std::floor(*c.number);
}

}  // namespace

nlohmann::ordered_json to_json(const Table& table) {
    nlohmann::ordered_json j;
    j["columns"] = table.columns;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < table.columns.size(); ++i) {
            const Cell& c = i < row.size() ? row[i] : Cell{};
            if (c.number && is_count(c))
                obj[table.columns[i]] = static_cast<std::int64_t>(*c.number);
            else if (c.number)
                obj[table.columns[i]] = *c.number;
            else
                obj[table.columns[i]] = c.text;
        }
        rows.push_back(std::move(obj));
    }
    return j;
}

std::string render(const Table& table, Format format) {
    std::ostringstream out;
    switch (format) {
        case Format::json: out << to_json(table).dump(2) << '\n'; break;
        case Format::tsv:
            for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "\t" : "") << table.columns[i];
            out << '\n';
            for (const auto& row : table.rows) {
                for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << sanitize(row[i].text, '\t');
                out << '\n';
            }
            break;
        case Format::markdown:
            out << '|';
            for (const auto& c : table.columns) out << ' ' << c << " |";
            out << "\n|";
            for (std::size_t i = 0; i < table.columns.size(); ++i) out << " --- |";
            out << '\n';
            for (const auto& row : table.rows) {
                out << '|';
                for (const auto& c : row) out << ' ' << sanitize(c.text, '|') << " |";
                out << '\n';
            }
            break;
    }
    return out.str();
}

Table field_ratio_table(const analysis::FieldParticipation& ratios) {
    Table t;
    t.columns = {"level",   "code",           "field",    "broad_field",        "fields",      "female_articles",
                 "male_articles", "fm_ratio", "most_female_subfield", "most_female_fm", "most_male_subfield",
                 "most_male_fm"};
    for (const auto& b : ratios.broad) {
        std::vector<Cell> row{"broad",
                              "",
                              b.totals.name,
                              b.totals.broad,
                              count_cell(b.narrow_fields),
                              count_cell(b.totals.f_count),
                              count_cell(b.totals.m_count),
                              ratio_cell(b.totals.corrected_ratio)};
        if (b.most_female) {
            row.push_back(b.most_female->name);
            row.push_back(ratio_cell(b.most_female->corrected_ratio));
            row.push_back(b.most_male->name);
            row.push_back(ratio_cell(b.most_male->corrected_ratio));
        } else {
            row.insert(row.end(), 4, Cell{});
        }
        t.rows.push_back(std::move(row));
    }
    for (const auto& n : ratios.narrow) {
        t.rows.push_back({"narrow", n.code, n.name, n.broad, count_cell(1), count_cell(n.f_count),
                          count_cell(n.m_count), ratio_cell(n.corrected_ratio), "", "", "", ""});
    }
    return t;
}

Table overall_terms_table(const analysis::OverallTermsResult& result, double overall_fm) {
    const Gender g = result.list.gender;
    const bool female = g == Gender::female;
    Table t;
    t.columns = {"rank",
                 "term",
                 female ? "fm_term_ratio" : "mf_term_ratio",
                 female ? "fm_author_ratio" : "mf_author_ratio",
                 "chi_square",
                 "p_value",
                 "bh_significant",
                 female ? "female_articles" : "male_articles",
                 female ? "male_articles" : "female_articles"};
    std::size_t rank = 0;
    for (const auto& e : result.list.entries) {
        const auto& s = e.score.table;
        Cell author;
        if (e.term_ratio.is_finite()) {
            const double v = gender::author_ratio_from_term_ratio(e.term_ratio.value, overall_fm, g);
            author = Cell(fixed(v, 2), v);
        } else {
            author = Cell(e.term_ratio.render());
        }
        char p[32];
        std::snprintf(p, sizeof p, "%.3g", e.score.p_value);
        t.rows.push_back({count_cell(++rank), e.term, ratio_cell(e.term_ratio), author, chi2_cell(e.score.chi2),
                          Cell(p, e.score.p_value), e.bh_significant ? "yes" : "no",
                          count_with_share(s.a, s.a + s.b), count_with_share(s.c, s.c + s.d)});
    }
    return t;
}

Table field_terms_table(const analysis::FieldTopTerms& field) {
    Table t;
    t.columns = {"list", "rank", "term", "female_articles", "male_articles", "chi_square"};
    for (const auto* list : {&field.female, &field.male}) {
        std::size_t rank = 0;
        for (const auto& e : list->entries) {
            const auto& s = e.score.table;
            // Group 1 of each score is the list's gender.
            const bool female = list->gender == Gender::female;
            const auto f = female ? s.a : s.c;
            const auto m = female ? s.c : s.a;
            t.rows.push_back({std::string(gender_code(list->gender)), count_cell(++rank), e.term,
                              count_with_share(f, field.female_docs), count_with_share(m, field.male_docs),
                              chi2_cell(e.score.chi2)});
        }
    }
    return t;
}

Table crossfield_table(const analysis::CrossFieldTally& tally, Gender g) {
    const bool female = g == Gender::female;
    Table t;
    t.columns = {"term", "fields", female ? "female" : "male", "female_fields", "male_fields", "context"};
    for (const auto& row : tally.selected) {
        if (row.majority != g) continue;
        t.rows.push_back({row.term, count_cell(row.total_fields()),
                          Cell(fixed(100.0 * row.gender_share, 0) + "%", row.gender_share),
                          count_cell(row.female_fields), count_cell(row.male_fields), ""});
    }
    return t;
}

Table kwic_table(const analysis::KwicResult& result) {
    Table t;
    t.columns = {"article_id", "gender", "fields", "matches", "text"};
    for (const auto& s : result.samples) {
        std::string fields;
        for (const auto& f : s.fields) fields += (fields.empty() ? "" : ";") + f;
        std::string offsets;
        for (const auto& [off, len] : s.matches)
            offsets += (offsets.empty() ? "" : ";") + std::to_string(off) + ":" + std::to_string(len);
        t.rows.push_back({s.article_id, std::string(gender_code(s.gender)), fields, offsets, s.text});
    }
    return t;
}

nlohmann::ordered_json kwic_json(const analysis::KwicResult& result) {
    nlohmann::ordered_json j;
    j["matching"] = result.matching;
    auto& samples = j["samples"] = nlohmann::ordered_json::array();
    for (const auto& s : result.samples) {
        nlohmann::ordered_json m = nlohmann::ordered_json::array();
        for (const auto& [off, len] : s.matches) m.push_back({{"offset", off}, {"length", len}});
        samples.push_back({{"term", s.term},
                           {"article_id", s.article_id},
                           {"gender", gender_code(s.gender)},
                           {"fields", s.fields},
                           {"text", s.text},
                           {"matches", m}});
    }
    auto& w = j["warnings"] = nlohmann::ordered_json::array();
    for (const auto& d : result.warnings) w.push_back(d.message);
    return j;
}

Table cooccurrence_table(const analysis::CooccurrenceResult& result) {
    Table t;
    t.columns = {"rank", "term", "chi_square", "anchor_share", "baseline_share", "anchor_docs_with", "baseline_docs_with"};
    std::size_t rank = 0;
    for (const auto& r : result.rows) {
        t.rows.push_back({count_cell(++rank), r.term, chi2_cell(r.score.chi2),
                          Cell(fixed(100.0 * r.anchor_share, 1) + "%", r.anchor_share),
                          Cell(fixed(100.0 * r.baseline_share, 1) + "%", r.baseline_share),
                          count_cell(r.score.table.a), count_cell(r.score.table.c)});
    }
    return t;
}

}  // namespace gterms::report
