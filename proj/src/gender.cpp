#include "gterms/gender.hpp"

#include "gterms/csv.hpp"
#include "gterms/error.hpp"
#include "gterms/unicode.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace gterms::gender {

namespace {

std::string_view first_token(std::string_view s) {
    std::size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    std::size_t e = b;
    while (e < s.size() && !std::isspace(static_cast<unsigned char>(s[e]))) ++e;
    return s.substr(b, e - b);
}

bool is_initial(std::string_view token) {
    std::size_t pos = 0;
    if (token.empty()) return true;
    const char32_t first = unicode::next_codepoint(token, pos);
    if (!unicode::is_word_char(first)) return false;
    const std::string_view rest = token.substr(pos);
    return rest.empty() || rest == ".";
}

std::string_view strip_trailing_punct(std::string_view s) {
    while (!s.empty() && (s.back() == ',' || s.back() == '.' || s.back() == ';')) s.remove_suffix(1);
    return s;
}

}  // namespace

NameGenderTable::NameGenderTable(double threshold) : threshold_(threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("name threshold must lie in (0, 1]");
}

NameGenderTable NameGenderTable::load(const std::filesystem::path& path, double threshold, Diagnostics* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read name table " + path.string());
    return load(in, threshold, path.string(), warnings);
}

NameGenderTable NameGenderTable::load(std::istream& in, double threshold, const std::string& source,
                                      Diagnostics* warnings) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw ConfigError(source + ": empty name table");
    std::map<std::string, std::size_t> cols;
    for (std::size_t i = 0; i < header->fields.size(); ++i) cols[csv::trim(header->fields[i])] = i;
    for (const char* name : {"name", "gender", "share"})
        if (!cols.count(name)) throw ConfigError(source + ": name table lacks column '" + name + "'");

    NameGenderTable table(threshold);
    while (auto row = reader.next()) {
        auto cell = [&](const char* name) {
            const std::size_t idx = cols.at(name);
            return idx < row->fields.size() ? csv::trim(row->fields[idx]) : std::string{};
        };
        const std::string name = cell("name");
        if (name.empty()) continue;
        const std::string share_text = cell("share");
        double share = 0.0;
        auto [ptr, ec] = std::from_chars(share_text.data(), share_text.data() + share_text.size(), share);
        if (ec != std::errc{} || ptr != share_text.data() + share_text.size() || share < 0.0 || share > 1.0)
            throw DataError(source + ":" + std::to_string(row->line) + ": share '" + share_text + "' not in [0,1]");
        const Gender g = parse_gender(cell("gender"));
        if (g == Gender::unknown)
            throw DataError(source + ":" + std::to_string(row->line) + ": name table gender must be M or F");
        if (!table.add(name, g, share) && warnings) {
            warnings->push_back(Diagnostic{Severity::warning, "gender",
                                           "name '" + name + "' rejected: share " + share_text + " below threshold",
                                           source, row->line});
        }
    }
    return table;
}

bool NameGenderTable::add(std::string_view name, Gender gender, double share) {
    if (share < threshold_) return false;
    entries_[unicode::lower(unicode::nfc(name))] = NameEntry{gender, share};
    return true;
}

const NameEntry* NameGenderTable::find(std::string_view name) const {
    auto it = entries_.find(unicode::lower(unicode::nfc(name)));
    return it == entries_.end() ? nullptr : &it->second;
}

Gender infer_gender(std::string_view given_name, const NameGenderTable& table) {
    const std::string_view token = first_token(given_name);
    if (is_initial(token)) return Gender::unknown;
    const std::string_view name = strip_trailing_punct(token);
    if (name.empty()) return Gender::unknown;
    if (const auto* e = table.find(name)) return e->gender;
    if (const auto hyphen = name.find('-'); hyphen != std::string_view::npos && hyphen > 0) {
        const std::string_view head = name.substr(0, hyphen);
        if (!is_initial(head))
            if (const auto* e = table.find(head)) return e->gender;
    }
    return Gender::unknown;
}

GenderLabels label_corpus(const ingest::Corpus& corpus, const NameGenderTable& table) {
    GenderLabels labels;
    for (const auto& r : corpus.records()) labels.set(r.article_id, infer_gender(r.given_name, table));
    return labels;
}

ValidationSample ValidationSample::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read validation sample " + path.string());
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw ConfigError(path.string() + ": empty validation sample");
    std::map<std::string, std::size_t> cols;
    for (std::size_t i = 0; i < header->fields.size(); ++i) cols[csv::trim(header->fields[i])] = i;
    for (const char* name : {"article_id", "manual_gender"})
        if (!cols.count(name)) throw ConfigError(path.string() + ": validation sample lacks column '" + name + "'");
    ValidationSample sample;
    while (auto row = reader.next()) {
        const auto& f = row->fields;
        if (cols["article_id"] >= f.size()) continue;
        std::string id = csv::trim(f[cols["article_id"]]);
        if (id.empty()) continue;
        const std::string g = cols["manual_gender"] < f.size() ? csv::trim(f[cols["manual_gender"]]) : "";
        sample.rows.push_back({std::move(id), parse_gender(g)});
    }
    return sample;
}

ValidationCounts tally_validation(const ValidationSample& sample, const ingest::Corpus& corpus,
                                  const NameGenderTable& table) {
    std::unordered_map<std::string_view, const ingest::ArticleRecord*> by_id;
    for (const auto& r : corpus.records()) by_id.emplace(r.article_id, &r);
    ValidationCounts counts;
    for (const auto& row : sample.rows) {
        auto it = by_id.find(row.article_id);
        if (it == by_id.end()) throw DataError("validation sample article " + row.article_id + " not in corpus");
        if (row.manual == Gender::male) ++counts.manual_male;
        if (row.manual == Gender::female) ++counts.manual_female;
        const Gender automatic = infer_gender(it->second->given_name, table);
        if (automatic == Gender::male) ++counts.auto_male;
        if (automatic == Gender::female) ++counts.auto_female;
    }
    return counts;
}

nlohmann::json CorrectionFactors::to_json() const {
    return {{"male_multiplier", male_multiplier},
            {"female_multiplier", female_multiplier},
            {"manual_male", counts.manual_male},
            {"manual_female", counts.manual_female},
            {"auto_male", counts.auto_male},
            {"auto_female", counts.auto_female}};
}

CorrectionFactors estimate_correction_factors(const ValidationCounts& counts) {
    if (counts.auto_male == 0 || counts.auto_female == 0)
        throw DomainError("cannot estimate correction factors: no automatic labels of one gender");
    if (counts.manual_male == 0 || counts.manual_female == 0)
        throw DomainError("cannot estimate correction factors: no manual labels of one gender");
    const double manual_n = static_cast<double>(counts.manual_resolved());
    const double auto_n = static_cast<double>(counts.auto_labelled());
    CorrectionFactors f;
    f.counts = counts;
    f.male_multiplier = (static_cast<double>(counts.manual_male) / manual_n) /
                        (static_cast<double>(counts.auto_male) / auto_n);
    f.female_multiplier = (static_cast<double>(counts.manual_female) / manual_n) /
                          (static_cast<double>(counts.auto_female) / auto_n);
    return f;
}

const CorrectionFactors& FactorTable::for_field(std::string_view code) const {
    auto it = per_field_.find(code);
    return it == per_field_.end() ? global_ : it->second;
}

Ratio corrected_odds_ratio(std::uint64_t f_count, std::uint64_t m_count, const CorrectionFactors& factors) {
    return Ratio::of_counts(f_count, m_count, factors.female_multiplier, factors.male_multiplier);
}

double author_ratio_from_term_ratio(double term_ratio, double overall_fm, Gender list_gender) {
    if (!(overall_fm > 0.0) || !std::isfinite(overall_fm))
        throw DomainError("overall F/M ratio must be positive and finite");
    return list_gender == Gender::male ? term_ratio / overall_fm : term_ratio * overall_fm;
}

}  // namespace gterms::gender
