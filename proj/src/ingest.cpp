#include "gterms/ingest.hpp"

#include "gterms/csv.hpp"
#include "gterms/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

namespace gterms::ingest {

namespace {

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string join(const std::set<std::string>& parts, std::string_view sep) {
    return join(std::vector<std::string>(parts.begin(), parts.end()), sep);
}

char delimiter_from(const std::string& value, char fallback) {
    if (value.empty()) return fallback;
    if (value == "\\t" || value == "tab") return '\t';
    if (value.size() != 1) throw ConfigError("delimiter must be a single character, got '" + value + "'");
    return value[0];
}

}  // namespace

std::string ArticleRecord::text() const {
    std::string out = title;
    out += '\n';
    out += abstract_text;
    out += '\n';
    out += join(keywords, "; ");
    return out;
}

// FieldCatalog

FieldCatalog FieldCatalog::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read field catalog " + path.string());
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw ConfigError("field catalog " + path.string() + " is empty");
    std::map<std::string, std::size_t> cols;
    for (std::size_t i = 0; i < header->fields.size(); ++i) cols[csv::trim(header->fields[i])] = i;
    for (const char* name : {"code", "narrow_name", "broad_name"})
        if (!cols.count(name)) throw ConfigError("field catalog lacks column '" + std::string(name) + "'");

    FieldCatalog catalog;
    while (auto row = reader.next()) {
        if (row->fields.size() == 1 && csv::trim(row->fields[0]).empty()) continue;
        auto cell = [&](const char* name) {
            const std::size_t idx = cols.at(name);
            return idx < row->fields.size() ? csv::trim(row->fields[idx]) : std::string{};
        };
        FieldInfo info{cell("code"), cell("narrow_name"), cell("broad_name")};
        if (info.code.empty() || info.broad_name.empty())
            throw DataError(path.string() + ":" + std::to_string(row->line) + ": field row needs code and broad_name");
        catalog.add(std::move(info));
    }
    return catalog;
}

void FieldCatalog::add(FieldInfo info) {
    auto it = fields_.find(info.code);
    if (it != fields_.end()) {
        if (it->second.broad_name != info.broad_name)
            throw DataError("field " + info.code + " mapped to two broad fields: " + it->second.broad_name + ", " +
                            info.broad_name);
        it->second = std::move(info);
        return;
    }
    std::string code = info.code;
    fields_.emplace(std::move(code), std::move(info));
}

const FieldInfo* FieldCatalog::find(std::string_view code) const {
    auto it = fields_.find(code);
    return it == fields_.end() ? nullptr : &it->second;
}

const FieldInfo& FieldCatalog::at(std::string_view code) const {
    if (const auto* info = find(code)) return *info;
    throw DataError("unknown field code " + std::string(code));
}

std::vector<std::string> FieldCatalog::codes() const {
    std::vector<std::string> out;
    out.reserve(fields_.size());
    for (const auto& [code, _] : fields_) out.push_back(code);
    return out;
}

std::vector<std::string> FieldCatalog::broad_fields() const {
    std::set<std::string> names;
    for (const auto& [_, info] : fields_) names.insert(info.broad_name);
    return {names.begin(), names.end()};
}

void FieldCatalog::set_min_gendered_articles(std::size_t n) {
    if (n < 1) throw ConfigError("minimum gendered articles per field must be at least 1");
    min_gendered_ = n;
}

// Corpus

Corpus::Corpus(std::vector<ArticleRecord> records, CorpusMode mode) : records_(std::move(records)), mode_(mode) {
    if (mode_ == CorpusMode::deduplicated) {
        std::set<std::string_view> seen;
        for (const auto& r : records_)
            if (!seen.insert(r.article_id).second)
                throw DataError("deduplicated corpus holds article " + r.article_id + " twice");
    }
}

// FormatConfig

FormatConfig FormatConfig::load(const std::filesystem::path& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        if (!std::filesystem::exists(path)) throw IoError("cannot read column mapping " + path.string());
        throw ConfigError("column mapping " + path.string() + ": " + e.message());
    }
    FormatConfig fmt;
    auto col = [&](const char* key, std::string& target) {
        if (auto v = tree.get_optional<std::string>(std::string("columns.") + key)) target = csv::trim(*v);
    };
    col("article_id", fmt.article_id);
    col("year", fmt.year);
    col("field_codes", fmt.field_codes);
    col("given_name", fmt.given_name);
    col("country", fmt.country);
    col("title", fmt.title);
    col("abstract", fmt.abstract_text);
    col("keywords", fmt.keywords);
    fmt.keyword_delimiter =
        delimiter_from(csv::trim(tree.get<std::string>("format.keyword_delimiter", "")), fmt.keyword_delimiter);
    fmt.field_code_delimiter =
        delimiter_from(csv::trim(tree.get<std::string>("format.field_code_delimiter", "")), fmt.field_code_delimiter);
    return fmt;
}

// Parsing

ParseResult parse_records(const std::filesystem::path& path, const FormatConfig& format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read corpus file " + path.string());
    return parse_records(in, format, path.string());
}

ParseResult parse_records(std::istream& in, const FormatConfig& format, const std::string& source) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw ConfigError(source + ": missing header row");

    std::map<std::string, std::size_t> cols;
    for (std::size_t i = 0; i < header->fields.size(); ++i) cols.emplace(csv::trim(header->fields[i]), i);

    auto required = [&](const std::string& name) {
        auto it = cols.find(name);
        if (it == cols.end()) throw ConfigError(source + ": required column '" + name + "' not in header");
        return it->second;
    };
    auto optional = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = cols.find(name);
        if (it == cols.end()) return std::nullopt;
        return it->second;
    };
    const std::size_t c_id = required(format.article_id);
    const std::size_t c_fields = required(format.field_codes);
    const std::size_t c_name = required(format.given_name);
    const std::size_t c_title = required(format.title);
    const std::size_t c_abstract = required(format.abstract_text);
    const auto c_year = optional(format.year);
    const auto c_country = optional(format.country);
    const auto c_keywords = optional(format.keywords);

    ParseResult result;
    std::vector<ArticleRecord> records;
    auto row_error = [&](std::size_t line, std::string msg) {
        result.diagnostics.push_back(Diagnostic{Severity::error, "ingest", std::move(msg), source, line});
        ++result.row_errors;
    };

    while (auto row = reader.next()) {
        const auto& f = row->fields;
        if (std::all_of(f.begin(), f.end(), [](const std::string& s) { return csv::trim(s).empty(); })) continue;
        if (f.size() != header->fields.size()) {
            row_error(row->line, "expected " + std::to_string(header->fields.size()) + " columns, found " +
                                     std::to_string(f.size()));
            continue;
        }
        ArticleRecord rec;
        rec.article_id = csv::trim(f[c_id]);
        if (rec.article_id.empty()) {
            row_error(row->line, "empty article_id");
            continue;
        }
        auto codes = csv::split(f[c_fields], format.field_code_delimiter);
        if (codes.empty()) {
            row_error(row->line, "article " + rec.article_id + " has no field codes");
            continue;
        }
        rec.field_codes.insert(codes.begin(), codes.end());
        if (c_year) {
            const std::string y = csv::trim(f[*c_year]);
            if (!y.empty()) {
                auto [ptr, ec] = std::from_chars(y.data(), y.data() + y.size(), rec.year);
                if (ec != std::errc{} || ptr != y.data() + y.size()) {
                    row_error(row->line, "article " + rec.article_id + " has non-numeric year '" + y + "'");
                    continue;
                }
            }
        }
        rec.given_name = csv::trim(f[c_name]);
        if (c_country) rec.country = csv::trim(f[*c_country]);
        rec.title = csv::trim(f[c_title]);
        rec.abstract_text = csv::trim(f[c_abstract]);
        if (c_keywords) rec.keywords = csv::split(f[*c_keywords], format.keyword_delimiter);
        records.push_back(std::move(rec));
    }
    result.corpus = Corpus(std::move(records), CorpusMode::per_field);
    return result;
}

void write_records(std::ostream& out, const Corpus& corpus, const FormatConfig& format) {
    const std::string kw_sep(1, format.keyword_delimiter);
    const std::string code_sep(1, format.field_code_delimiter);
    csv::write_row(out, {format.article_id, format.year, format.field_codes, format.given_name, format.country,
                         format.title, format.abstract_text, format.keywords});
    for (const auto& r : corpus.records()) {
        csv::write_row(out, {r.article_id, r.year ? std::to_string(r.year) : std::string{}, join(r.field_codes, code_sep),
                             r.given_name, r.country, r.title, r.abstract_text, join(r.keywords, kw_sep)});
    }
}

// Filters

bool CountryFilter::accepts(std::string_view country) const {
    if (allowed.empty()) return true;
    const std::string c = lower_ascii(csv::trim(country));
    return std::any_of(allowed.begin(), allowed.end(), [&](const std::string& a) { return lower_ascii(a) == c; });
}

Corpus apply_country_filter(const Corpus& corpus, const CountryFilter& filter) {
    std::vector<ArticleRecord> kept;
    for (const auto& r : corpus.records())
        if (filter.accepts(r.country)) kept.push_back(r);
    return Corpus(std::move(kept), corpus.mode());
}

Corpus dedupe_articles(const Corpus& corpus) {
    std::vector<const ArticleRecord*> order;
    order.reserve(corpus.size());
    for (const auto& r : corpus.records()) order.push_back(&r);
    // Full-record ordering makes the survivor independent of input order.
    std::sort(order.begin(), order.end(), [](const ArticleRecord* x, const ArticleRecord* y) {
        return std::tie(x->article_id, x->field_codes, x->year, x->given_name, x->country, x->abstract_text,
                        x->keywords) < std::tie(y->article_id, y->field_codes, y->year, y->given_name, y->country,
                                                y->abstract_text, y->keywords);
    });

    std::vector<ArticleRecord> out;
    for (const ArticleRecord* r : order) {
        if (!out.empty() && out.back().article_id == r->article_id) {
            auto& survivor = out.back();
            if (survivor.title != r->title)
                throw DataError("article " + r->article_id + " has conflicting titles: \"" + survivor.title +
                                "\" vs \"" + r->title + "\"");
            survivor.field_codes.insert(r->field_codes.begin(), r->field_codes.end());
            continue;
        }
        out.push_back(*r);
    }
    return Corpus(std::move(out), CorpusMode::deduplicated);
}

void check_field_codes(const Corpus& corpus, const FieldCatalog& catalog) {
    for (const auto& r : corpus.records())
        for (const auto& code : r.field_codes)
            if (!catalog.contains(code))
                throw DataError("article " + r.article_id + " has field code " + code + " absent from the catalog");
}

std::set<std::string> FieldFilterResult::kept_codes() const {
    std::set<std::string> out;
    for (const auto& f : kept) out.insert(f.code);
    return out;
}

FieldFilterResult filter_min_size(const Corpus& corpus, const FieldCatalog& catalog, const GenderLabels& labels) {
    std::map<std::string, std::set<std::string_view>> gendered;
    for (const auto& r : corpus.records()) {
        if (labels.get(r.article_id) == Gender::unknown) continue;
        for (const auto& code : r.field_codes) gendered[code].insert(r.article_id);
    }
    FieldFilterResult result;
    for (const auto& code : catalog.codes()) {
        auto it = gendered.find(code);
        const std::size_t n = it == gendered.end() ? 0 : it->second.size();
        FieldCount fc{code, n};
        if (n >= catalog.min_gendered_articles())
            result.kept.push_back(std::move(fc));
        else
            result.excluded.push_back(std::move(fc));
    }
    return result;
}

Corpus restrict_to_fields(const Corpus& corpus, const std::set<std::string>& codes) {
    std::vector<ArticleRecord> out;
    for (const auto& r : corpus.records()) {
        ArticleRecord copy = r;
        std::erase_if(copy.field_codes, [&](const std::string& c) { return !codes.count(c); });
        if (!copy.field_codes.empty()) out.push_back(std::move(copy));
    }
    return Corpus(std::move(out), corpus.mode());
}

}  // namespace gterms::ingest
