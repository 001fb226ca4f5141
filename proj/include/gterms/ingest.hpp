#pragma once

#include "gterms/diagnostics.hpp"
#include "gterms/labels.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace gterms::ingest {

struct ArticleRecord {
    std::string article_id;
    int year = 0;
    std::set<std::string> field_codes;
    std::string given_name;
    std::string country;
    std::string title;
    std::string abstract_text;
    std::vector<std::string> keywords;

    // Title, abstract and keywords joined by newlines: the text that is
    // tokenized and shown in KWIC samples.
    std::string text() const;

    bool operator==(const ArticleRecord&) const = default;
};

struct FieldInfo {
    std::string code;
    std::string narrow_name;
    std::string broad_name;
};

// Narrow field code -> (narrow name, broad name).
class FieldCatalog {
public:
    // CSV with header code,narrow_name,broad_name.
    static FieldCatalog load(const std::filesystem::path& path);

    void add(FieldInfo info);

    const FieldInfo* find(std::string_view code) const;
    const FieldInfo& at(std::string_view code) const;
    bool contains(std::string_view code) const { return find(code) != nullptr; }

    // Sorted narrow codes.
    std::vector<std::string> codes() const;
    // Sorted distinct broad field names.
    std::vector<std::string> broad_fields() const;

    std::size_t min_gendered_articles() const { return min_gendered_; }
    void set_min_gendered_articles(std::size_t n);

    std::size_t size() const { return fields_.size(); }

private:
    std::map<std::string, FieldInfo, std::less<>> fields_;
    std::size_t min_gendered_ = 50;
};

enum class CorpusMode { per_field, deduplicated };

// Immutable list of records.
class Corpus {
public:
    Corpus() = default;
    Corpus(std::vector<ArticleRecord> records, CorpusMode mode);

    const std::vector<ArticleRecord>& records() const { return records_; }
    CorpusMode mode() const { return mode_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    bool operator==(const Corpus&) const = default;

private:
    std::vector<ArticleRecord> records_;
    CorpusMode mode_ = CorpusMode::per_field;
};

// Column mapping for the CSV export.
struct FormatConfig {
    std::string article_id = "article_id";
    std::string year = "year";
    std::string field_codes = "field_codes";
    std::string given_name = "given_name";
    std::string country = "country";
    std::string title = "title";
    std::string abstract_text = "abstract";
    std::string keywords = "keywords";
    char keyword_delimiter = ';';
    char field_code_delimiter = ';';

    // INI file with a [columns] section (keys as the member names, `abstract`
    // for abstract_text) and an optional [format] section with
    // keyword_delimiter / field_code_delimiter.
    static FormatConfig load(const std::filesystem::path& path);
};

struct ParseResult {
    Corpus corpus;
    Diagnostics diagnostics;
    std::size_t row_errors = 0;
};

// Throws ConfigError if a mapped column is missing from the header and
// IoError if the file cannot be read. Malformed rows are reported, not dropped
// silently.
ParseResult parse_records(const std::filesystem::path& path, const FormatConfig& format);
ParseResult parse_records(std::istream& in, const FormatConfig& format, const std::string& source = "<stream>");

void write_records(std::ostream& out, const Corpus& corpus, const FormatConfig& format);

// Case-insensitive allow-list on the country column; empty list passes all.
struct CountryFilter {
    std::vector<std::string> allowed;
    bool accepts(std::string_view country) const;
};

Corpus apply_country_filter(const Corpus& corpus, const CountryFilter& filter);

// One record per article_id, field codes unioned, records ordered by
// article_id. Throws DataError when duplicates disagree on the title.
Corpus dedupe_articles(const Corpus& corpus);

// Throws DataError naming the first record whose field code is not catalogued.
void check_field_codes(const Corpus& corpus, const FieldCatalog& catalog);

struct FieldCount {
    std::string code;
    std::size_t gendered_articles = 0;
};

struct FieldFilterResult {
    std::vector<FieldCount> kept;
    std::vector<FieldCount> excluded;

    std::set<std::string> kept_codes() const;
};

// A catalogued field is kept iff its number of distinct gender-labelled
// articles reaches the catalog minimum. Fields without any records are
// excluded with count 0.
FieldFilterResult filter_min_size(const Corpus& corpus, const FieldCatalog& catalog, const GenderLabels& labels);

// Drops field codes outside `codes`; records left with no codes are removed.
Corpus restrict_to_fields(const Corpus& corpus, const std::set<std::string>& codes);

}  // namespace gterms::ingest
