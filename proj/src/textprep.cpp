#include "gterms/textprep.hpp"

#include "gterms/error.hpp"
#include "gterms/unicode.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace gterms::textprep {

namespace {

bool is_hyphen(char32_t cp) { return cp == U'-' || cp == U'‐' || cp == U'‑'; }

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == U'’'; }

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

struct Unit {
    char32_t cp;
    std::size_t begin;
    std::size_t end;
};

}  // namespace

std::vector<TokenSpan> tokenize_spans(std::string_view text, const TokenRules& rules) {
    std::vector<TokenSpan> out;
    std::vector<Unit> run;

    auto flush = [&] {
        auto is_joiner = [](const Unit& u) { return is_hyphen(u.cp) || is_apostrophe(u.cp); };
        auto first = std::find_if_not(run.begin(), run.end(), is_joiner);
        auto last = std::find_if_not(run.rbegin(), std::make_reverse_iterator(first), is_joiner).base();
        if (first < last && static_cast<std::size_t>(last - first) >= rules.min_length) {
            std::string term;
            for (auto it = first; it != last; ++it) {
                if (is_hyphen(it->cp))
                    term.push_back('-');
                else if (is_apostrophe(it->cp))
                    term.push_back('\'');
                else
                    append_utf8(term, it->cp);
            }
            if (rules.lowercase) term = unicode::lower(term);
            out.push_back({std::move(term), first->begin, (last - 1)->end - first->begin});
        }
        run.clear();
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t begin = pos;
        const char32_t cp = unicode::next_codepoint(text, pos);
        const bool keep = unicode::is_word_char(cp) || (rules.keep_hyphens && is_hyphen(cp)) ||
                          (rules.keep_apostrophes && is_apostrophe(cp));
        if (keep)
            run.push_back({cp, begin, pos});
        else if (!run.empty())
            flush();
    }
    if (!run.empty()) flush();
    return out;
}

std::set<std::string> tokenize(std::string_view text, const TokenRules& rules) {
    std::set<std::string> terms;
    for (auto& span : tokenize_spans(unicode::nfc(text), rules)) terms.insert(std::move(span.term));
    return terms;
}

DepluralMode parse_deplural(std::string_view s) {
    if (s == "conditional") return DepluralMode::conditional;
    if (s == "always") return DepluralMode::always;
    if (s == "off") return DepluralMode::off;
    throw ConfigError("deplural must be conditional, always or off, got '" + std::string(s) + "'");
}

std::string_view deplural_name(DepluralMode m) {
    switch (m) {
        case DepluralMode::always: return "always";
        case DepluralMode::off: return "off";
        default: return "conditional";
    }
}

bool plural_shaped(std::string_view term) {
    if (term.size() < 2 || term.back() != 's') return false;
    const char prev = term[term.size() - 2];
    if (prev == 's' || prev == '\'') return false;
    return unicode::codepoint_count(term) >= 4;
}

std::string depluralize(std::string_view term, const std::unordered_set<std::string>& vocabulary, DepluralMode mode) {
    if (mode == DepluralMode::off || !plural_shaped(term)) return std::string(term);
    std::string stem(term.substr(0, term.size() - 1));
    if (mode == DepluralMode::always || vocabulary.count(stem)) return stem;
    return std::string(term);
}

std::set<std::string> load_stoplist(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read stoplist " + path.string());
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos || line[b] == '#') continue;
        auto e = line.find_last_not_of(" \t");
        out.insert(unicode::lower(unicode::nfc(line.substr(b, e - b + 1))));
    }
    return out;
}

std::set<std::string> document_terms(std::string_view text, const TextOptions& options,
                                     const std::unordered_set<std::string>& vocabulary) {
    std::set<std::string> out;
    for (const auto& raw : tokenize(text, options.rules)) {
        std::string term = depluralize(raw, vocabulary, options.deplural);
        if (!options.stoplist.count(term)) out.insert(std::move(term));
    }
    return out;
}

// TermIndex

TermIndex TermIndex::build(const ingest::Corpus& corpus, const GenderLabels& labels,
                           const ingest::FieldCatalog& catalog, const TextOptions& options) {
    const ingest::Corpus deduped =
        corpus.mode() == ingest::CorpusMode::deduplicated ? corpus : ingest::dedupe_articles(corpus);

    TermIndex index;
    index.options_ = options;

    // Ordinals follow article_id so the index does not depend on input order.
    std::vector<const ingest::ArticleRecord*> sorted;
    for (const auto& r : deduped.records()) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](auto* x, auto* y) { return x->article_id < y->article_id; });

    std::vector<const ingest::ArticleRecord*> records;
    for (const auto* rp : sorted) {
        const auto& r = *rp;
        const Gender g = labels.get(r.article_id);
        if (g == Gender::unknown) continue;
        for (const auto& code : r.field_codes)
            if (!catalog.contains(code))
                throw DataError("cannot index article " + r.article_id + ": field code " + code + " not in catalog");
        records.push_back(&r);
        index.docs_.push_back({r.article_id, g, {r.field_codes.begin(), r.field_codes.end()}});
    }

    // Pass 1: raw-token vocabulary for conditional depluralization.
    std::vector<std::set<std::string>> raw(records.size());
    std::unordered_set<std::string> vocabulary;
    for (std::size_t i = 0; i < records.size(); ++i) {
        raw[i] = tokenize(records[i]->text(), options.rules);
        vocabulary.insert(raw[i].begin(), raw[i].end());
    }

    // Pass 2: final terms.
    std::map<std::string, std::vector<std::uint32_t>> postings;
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::set<std::string> terms;
        for (const auto& t : raw[i]) {
            std::string term = depluralize(t, vocabulary, options.deplural);
            if (!options.stoplist.count(term)) terms.insert(std::move(term));
        }
        for (const auto& t : terms) postings[t].push_back(static_cast<std::uint32_t>(i));
    }

    index.terms_.reserve(postings.size());
    index.postings_.reserve(postings.size());
    for (auto& [term, docs] : postings) {
        index.terms_.push_back(term);
        index.postings_.push_back(std::move(docs));
    }
    index.build_partitions();
    return index;
}

void TermIndex::build_partitions() {
    forward_.assign(docs_.size(), {});
    for (std::uint32_t t = 0; t < postings_.size(); ++t)
        for (std::uint32_t d : postings_[t]) forward_[d].push_back(t);

    std::unordered_map<std::string, std::unordered_map<std::uint32_t, TermCounts>> acc;
    partitions_.clear();
    partitions_[std::string(overall)];
    for (std::uint32_t d = 0; d < docs_.size(); ++d) {
        const auto& doc = docs_[d];
        const bool female = doc.gender == Gender::female;
        std::vector<std::string_view> scopes{overall};
        for (const auto& code : doc.field_codes) scopes.push_back(code);
        for (auto scope : scopes) {
            auto& part = partitions_[std::string(scope)];
            (female ? part.female_docs : part.male_docs) += 1;
            auto& counts = acc[std::string(scope)];
            for (std::uint32_t t : forward_[d]) {
                auto& c = counts[t];
                c.term = t;
                (female ? c.female : c.male) += 1;
            }
        }
    }
    for (auto& [scope, counts] : acc) {
        auto& vec = partitions_[scope].counts;
        vec.reserve(counts.size());
        for (const auto& [_, c] : counts) vec.push_back(c);
        std::sort(vec.begin(), vec.end(), [](const TermCounts& x, const TermCounts& y) { return x.term < y.term; });
    }
}

std::optional<std::uint32_t> TermIndex::find_doc(std::string_view article_id) const {
    auto it = std::lower_bound(docs_.begin(), docs_.end(), article_id,
                               [](const IndexedDoc& d, std::string_view id) { return d.article_id < id; });
    if (it == docs_.end() || it->article_id != article_id) return std::nullopt;
    return static_cast<std::uint32_t>(it - docs_.begin());
}

std::optional<std::uint32_t> TermIndex::term_id(std::string_view term) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), term);
    if (it == terms_.end() || *it != term) return std::nullopt;
    return static_cast<std::uint32_t>(it - terms_.begin());
}

std::vector<std::string> TermIndex::fields() const {
    std::vector<std::string> out;
    for (const auto& [scope, _] : partitions_)
        if (scope != overall) out.push_back(scope);
    std::sort(out.begin(), out.end());
    return out;
}

const TermIndex::Partition& TermIndex::partition(std::string_view scope) const {
    auto it = partitions_.find(std::string(scope));
    if (it == partitions_.end()) throw NotFoundError("no indexed documents for scope " + std::string(scope));
    return it->second;
}

std::uint64_t TermIndex::partition_size(std::string_view scope, Gender g) const {
    const auto& p = partition(scope);
    return g == Gender::female ? p.female_docs : g == Gender::male ? p.male_docs : 0;
}

std::uint64_t TermIndex::term_count(std::uint32_t term, std::string_view scope, Gender g) const {
    const auto& counts = partition(scope).counts;
    auto it = std::lower_bound(counts.begin(), counts.end(), term,
                               [](const TermCounts& c, std::uint32_t t) { return c.term < t; });
    if (it == counts.end() || it->term != term) return 0;
    return it->count(g);
}

std::vector<std::string> TermIndex::article_ids(std::uint32_t term, std::string_view scope, Gender g) const {
    std::vector<std::string> out;
    for (std::uint32_t d : postings(term)) {
        const auto& doc = docs_[d];
        if (doc.gender != g) continue;
        if (scope != overall &&
            std::find(doc.field_codes.begin(), doc.field_codes.end(), scope) == doc.field_codes.end())
            continue;
        out.push_back(doc.article_id);
    }
    return out;
}

std::span<const TermCounts> TermIndex::scope_terms(std::string_view scope) const {
    return partition(scope).counts;
}

nlohmann::json TermIndex::snapshot() const {
    nlohmann::json j;
    j["format"] = "gterms-term-index";
    j["version"] = snapshot_version;
    j["options"] = {{"deplural", deplural_name(options_.deplural)},
                    {"keep_hyphens", options_.rules.keep_hyphens},
                    {"keep_apostrophes", options_.rules.keep_apostrophes},
                    {"lowercase", options_.rules.lowercase},
                    {"min_length", options_.rules.min_length},
                    {"stoplist", options_.stoplist}};
    auto& docs = j["docs"] = nlohmann::json::array();
    for (const auto& d : docs_)
        docs.push_back({{"id", d.article_id}, {"gender", gender_code(d.gender)}, {"fields", d.field_codes}});
    j["terms"] = terms_;
    j["postings"] = postings_;
    return j;
}

TermIndex TermIndex::from_snapshot(const nlohmann::json& j) {
    if (j.value("format", "") != "gterms-term-index") throw DataError("not a term index snapshot");
    if (j.value("version", 0) != snapshot_version)
        throw DataError("unsupported term index snapshot version " + std::to_string(j.value("version", 0)));
    TermIndex index;
    const auto& o = j.at("options");
    index.options_.deplural = parse_deplural(o.at("deplural").get<std::string>());
    index.options_.rules.keep_hyphens = o.at("keep_hyphens").get<bool>();
    index.options_.rules.keep_apostrophes = o.at("keep_apostrophes").get<bool>();
    index.options_.rules.lowercase = o.at("lowercase").get<bool>();
    index.options_.rules.min_length = o.at("min_length").get<std::size_t>();
    index.options_.stoplist = o.at("stoplist").get<std::set<std::string>>();
    for (const auto& d : j.at("docs"))
        index.docs_.push_back({d.at("id").get<std::string>(), parse_gender(d.at("gender").get<std::string>()),
                               d.at("fields").get<std::vector<std::string>>()});
    index.terms_ = j.at("terms").get<std::vector<std::string>>();
    index.postings_ = j.at("postings").get<std::vector<std::vector<std::uint32_t>>>();
    if (index.postings_.size() != index.terms_.size()) throw DataError("snapshot postings/terms length mismatch");
    for (const auto& p : index.postings_)
        for (std::uint32_t d : p)
            if (d >= index.docs_.size()) throw DataError("snapshot posting refers to missing document");
    index.build_partitions();
    return index;
}

}  // namespace gterms::textprep
