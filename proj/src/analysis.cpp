#include "gterms/analysis.hpp"

#include "gterms/error.hpp"
#include "gterms/unicode.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <unordered_map>

namespace gterms::analysis {

namespace {

bool ratio_row_before(const FieldRatioRow& x, const FieldRatioRow& y) {
    const int c = compare(x.corrected_ratio, y.corrected_ratio);
    if (c != 0) return c > 0;
    return x.name < y.name;
}

struct GenderSets {
    std::set<std::string_view> female;
    std::set<std::string_view> male;

    void add(Gender g, std::string_view id) { (g == Gender::female ? female : male).insert(id); }
};

FieldRatioRow make_row(std::string code, std::string name, std::string broad, const GenderSets& sets,
                       const gender::CorrectionFactors& factors) {
    FieldRatioRow row{std::move(code), std::move(name), std::move(broad), sets.female.size(), sets.male.size(), {}};
    row.corrected_ratio = gender::corrected_odds_ratio(row.f_count, row.m_count, factors);
    return row;
}

TermEntry make_entry(const std::string& term, const stats::AssociationScore& score) {
    const auto& t = score.table;
    TermEntry e;
    e.term = term;
    e.score = score;
    e.share = static_cast<double>(t.a) / static_cast<double>(t.a + t.b);
    e.other_share = static_cast<double>(t.c) / static_cast<double>(t.c + t.d);
    if (t.c == 0)
        e.term_ratio = Ratio::infinite(t.a);
    else
        e.term_ratio = Ratio::finite(e.share / e.other_share);
    return e;
}

bool by_chi2(const TermEntry& x, const TermEntry& y) {
    if (x.score.chi2 != y.score.chi2) return x.score.chi2 > y.score.chi2;
    return x.term < y.term;
}

bool by_ratio(const TermEntry& x, const TermEntry& y) {
    const int c = compare(x.term_ratio, y.term_ratio);
    if (c != 0) return c > 0;
    return by_chi2(x, y);
}

// Unbiased integer in [0, bound) from a 64-bit engine, independent of the
// standard library's distribution implementation.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

}  // namespace

// Field participation

FieldParticipation field_participation(const ingest::Corpus& corpus, const GenderLabels& labels,
                                       const gender::FactorTable& factors, const ingest::FieldCatalog& catalog,
                                       const std::set<std::string>& kept_codes) {
    std::map<std::string, GenderSets> narrow;
    std::map<std::string, GenderSets> broad;
    for (const auto& r : corpus.records()) {
        const Gender g = labels.get(r.article_id);
        if (g == Gender::unknown) continue;
        for (const auto& code : r.field_codes) {
            if (!kept_codes.count(code)) continue;
            narrow[code].add(g, r.article_id);
            broad[catalog.at(code).broad_name].add(g, r.article_id);
        }
    }

    FieldParticipation out;
    std::map<std::string, std::vector<FieldRatioRow>> by_broad;
    for (const auto& [code, sets] : narrow) {
        const auto& info = catalog.at(code);
        auto row = make_row(code, info.narrow_name.empty() ? code : info.narrow_name, info.broad_name, sets,
                            factors.for_field(code));
        by_broad[info.broad_name].push_back(row);
        out.narrow.push_back(std::move(row));
    }
    std::sort(out.narrow.begin(), out.narrow.end(), ratio_row_before);

    for (auto& [name, sets] : broad) {
        BroadFieldRow row;
        row.totals = make_row("", name, name, sets, factors.global());
        auto& subs = by_broad[name];
        std::sort(subs.begin(), subs.end(), ratio_row_before);
        row.narrow_fields = subs.size();
        if (!subs.empty()) {
            row.most_female = subs.front();
            row.most_male = subs.back();
        }
        out.broad.push_back(std::move(row));
    }
    std::sort(out.broad.begin(), out.broad.end(),
              [](const BroadFieldRow& x, const BroadFieldRow& y) { return ratio_row_before(x.totals, y.totals); });
    return out;
}

// Term lists

ScopeScores score_scope(const textprep::TermIndex& index, std::string_view scope, Gender g,
                        stats::CorrectionPolicy policy) {
    const std::uint64_t n_g = index.partition_size(scope, g);
    const std::uint64_t n_o = index.partition_size(scope, other(g));
    ScopeScores out;
    for (const auto& counts : index.scope_terms(scope)) {
        const std::uint64_t a = counts.count(g);
        const std::uint64_t c = counts.count(other(g));
        const stats::ContingencyTable table{a, n_g - a, c, n_o - c};
        if (table.degenerate()) {
            ++out.degenerate;
            continue;
        }
        ++out.scored;
        const auto score = stats::chi_square_2x2(table, policy);
        if (score.direction != stats::Direction::group1) continue;
        out.entries.push_back(make_entry(index.term(counts.term), score));
    }
    std::sort(out.entries.begin(), out.entries.end(), by_chi2);
    return out;
}

OverallTermsResult overall_gendered_terms(const textprep::TermIndex& index, Gender g, const OverallParams& params) {
    if (g == Gender::unknown) throw ConfigError("overall term list needs a gender");
    if (!(params.alpha > 0.0 && params.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    OverallTermsResult out;
    out.list.gender = g;
    out.list.scope = std::string(textprep::TermIndex::overall);
    out.list.ordering = Ordering::term_ratio;

    auto scores = score_scope(index, textprep::TermIndex::overall, g, params.policy);
    out.scored = scores.scored;
    out.degenerate = scores.degenerate;
    out.leaning = scores.entries.size();
    if (scores.entries.empty()) {
        out.warnings.push_back(warning("terms", "no terms lean towards " + std::string(gender_code(g))));
        return out;
    }
    if (scores.entries.size() < params.top_n)
        out.warnings.push_back(warning("terms", "only " + std::to_string(scores.entries.size()) + " " +
                                                    std::string(gender_code(g)) + "-leaning terms; top_n is " +
                                                    std::to_string(params.top_n)));
    auto& selected = scores.entries;
    if (selected.size() > params.top_n) selected.resize(params.top_n);
    out.selected = selected.size();

    std::vector<double> p(selected.size());
    for (std::size_t i = 0; i < selected.size(); ++i) p[i] = selected[i].score.p_value;
    for (std::size_t i : stats::benjamini_hochberg(p, params.alpha)) {
        selected[i].bh_significant = true;
        ++out.bh_rejected;
        if (!out.min_significant_chi2 || selected[i].score.chi2 < *out.min_significant_chi2)
            out.min_significant_chi2 = selected[i].score.chi2;
    }
    if (out.bh_rejected < out.selected)
        out.warnings.push_back(warning("terms", std::to_string(out.selected - out.bh_rejected) + " of " +
                                                    std::to_string(out.selected) + " selected " +
                                                    std::string(gender_code(g)) +
                                                    " terms not significant under Benjamini-Hochberg"));

    std::sort(selected.begin(), selected.end(), by_ratio);
    if (selected.size() > params.rank_n) selected.resize(params.rank_n);
    out.list.entries = std::move(selected);
    return out;
}

FieldTopTerms per_field_top_terms(const textprep::TermIndex& index, const std::string& field, std::size_t k,
                                  stats::CorrectionPolicy policy) {
    if (!index.has_scope(field)) throw NotFoundError("field " + field + " has no indexed articles");
    FieldTopTerms out;
    out.field = field;
    out.female_docs = index.partition_size(field, Gender::female);
    out.male_docs = index.partition_size(field, Gender::male);
    if (out.female_docs == 0 || out.male_docs == 0)
        throw DataError("field " + field + " has articles of only one gender");

    for (Gender g : {Gender::female, Gender::male}) {
        auto scores = score_scope(index, field, g, policy);
        if (scores.entries.size() < k)
            out.warnings.push_back(warning("field-terms", "field " + field + ": only " +
                                                              std::to_string(scores.entries.size()) + " " +
                                                              std::string(gender_code(g)) + "-leaning terms for k=" +
                                                              std::to_string(k)));
        if (scores.entries.size() > k) scores.entries.resize(k);
        auto& list = g == Gender::female ? out.female : out.male;
        list.gender = g;
        list.scope = field;
        list.ordering = Ordering::chi2;
        list.entries = std::move(scores.entries);
    }
    return out;
}

// Cross-field tally

CrossFieldTally cross_field_tally(std::span<const FieldTopTerms> per_field, const TallyParams& params) {
    if (params.min_share < 0.5 || params.min_share > 1.0) throw ConfigError("min_share must lie in [0.5, 1]");
    std::map<std::string, TallyRow> rows;
    for (const auto& field : per_field) {
        for (const auto& e : field.female.entries) {
            auto& row = rows[e.term];
            row.term = e.term;
            ++row.female_fields;
        }
        for (const auto& e : field.male.entries) {
            auto& row = rows[e.term];
            row.term = e.term;
            ++row.male_fields;
        }
    }
    CrossFieldTally out;
    out.analyzed_fields = per_field.size();
    for (auto& [_, row] : rows) {
        const std::size_t total = row.total_fields();
        if (row.female_fields > row.male_fields)
            row.majority = Gender::female;
        else if (row.male_fields > row.female_fields)
            row.majority = Gender::male;
        row.gender_share =
            static_cast<double>(std::max(row.female_fields, row.male_fields)) / static_cast<double>(total);
        out.rows.push_back(row);
    }
    std::sort(out.rows.begin(), out.rows.end(), [](const TallyRow& x, const TallyRow& y) {
        if (x.total_fields() != y.total_fields()) return x.total_fields() > y.total_fields();
        if (x.gender_share != y.gender_share) return x.gender_share > y.gender_share;
        return x.term < y.term;
    });
    for (const auto& row : out.rows)
        if (row.majority != Gender::unknown && row.total_fields() >= params.min_fields &&
            row.gender_share >= params.min_share)
            out.selected.push_back(row);
    return out;
}

std::optional<TallySignificance> tally_significance(const CrossFieldTally& tally, const textprep::TermIndex& index,
                                                    std::size_t k, std::size_t min_fields, double overlap) {
    if (tally.selected.empty() || tally.analyzed_fields == 0) return std::nullopt;
    TallySignificance sig;
    sig.min_doc_frequency = std::numeric_limits<std::uint64_t>::max();
    for (const auto& row : tally.selected) {
        const auto id = index.term_id(row.term);
        if (!id) continue;
        sig.min_doc_frequency = std::min<std::uint64_t>(sig.min_doc_frequency, index.postings(*id).size());
    }
    for (std::uint32_t t = 0; t < index.terms().size(); ++t)
        if (index.postings(t).size() >= sig.min_doc_frequency) ++sig.eligible_vocab;
    if (sig.eligible_vocab <= k) return std::nullopt;
    sig.model.fields = tally.analyzed_fields;
    sig.model.hit_probability = static_cast<double>(k) / static_cast<double>(sig.eligible_vocab);
    sig.model.threshold = std::min<std::uint64_t>(min_fields, tally.analyzed_fields);
    sig.model.vocab_size = sig.eligible_vocab;
    sig.model.overlap = overlap;
    sig.unadjusted = stats::tally_union_bound(sig.model, false);
    sig.adjusted = stats::tally_union_bound(sig.model, true);
    return sig;
}

std::set<std::string> biased_fields(std::span<const FieldTopTerms> per_field, std::string_view term, Gender g) {
    std::set<std::string> out;
    for (const auto& field : per_field) {
        const auto& list = g == Gender::female ? field.female : field.male;
        for (const auto& e : list.entries)
            if (e.term == term) {
                out.insert(field.field);
                break;
            }
    }
    return out;
}

// KWIC

KwicResult kwic_sample(const textprep::TermIndex& index, const ingest::Corpus& corpus, const KwicQuery& query) {
    if (query.n == 0) throw ConfigError("KWIC sample size must be positive");
    const auto id = index.term_id(query.term);
    if (!id) throw NotFoundError("term '" + query.term + "' not in index");

    std::vector<std::uint32_t> matching;
    for (std::uint32_t d : index.postings(*id)) {
        const auto& doc = index.doc(d);
        if (query.gender && doc.gender != *query.gender) continue;
        if (query.fields) {
            const bool in_scope = std::any_of(doc.field_codes.begin(), doc.field_codes.end(),
                                              [&](const std::string& c) { return query.fields->count(c) > 0; });
            if (!in_scope) continue;
        }
        matching.push_back(d);
    }
    if (matching.empty()) throw NotFoundError("term '" + query.term + "' has no matching articles in scope");

    KwicResult out;
    out.matching = matching.size();
    if (matching.size() < query.n)
        out.warnings.push_back(warning("kwic", "term '" + query.term + "' has only " +
                                                   std::to_string(matching.size()) + " matching articles (n=" +
                                                   std::to_string(query.n) + ")"));
    if (matching.size() > query.n) {
        std::mt19937_64 rng(query.seed);
        for (std::size_t i = 0; i < query.n; ++i) {
            const std::size_t j = i + uniform_below(rng, matching.size() - i);
            std::swap(matching[i], matching[j]);
        }
        matching.resize(query.n);
        std::sort(matching.begin(), matching.end());
    }

    std::unordered_map<std::string_view, const ingest::ArticleRecord*> by_id;
    for (const auto& r : corpus.records()) by_id.emplace(r.article_id, &r);

    const auto& options = index.options();
    const std::string plural = query.term + "s";
    const bool plural_matches =
        options.deplural != textprep::DepluralMode::off && textprep::plural_shaped(plural);
    for (std::uint32_t d : matching) {
        const auto& doc = index.doc(d);
        auto it = by_id.find(doc.article_id);
        if (it == by_id.end()) throw DataError("article " + doc.article_id + " missing from corpus");
        KwicSample s;
        s.term = query.term;
        s.article_id = doc.article_id;
        s.text = unicode::nfc(it->second->text());
        s.gender = doc.gender;
        s.fields = doc.field_codes;
        for (const auto& span : textprep::tokenize_spans(s.text, options.rules))
            if (span.term == query.term || (plural_matches && span.term == plural))
                s.matches.emplace_back(span.offset, span.length);
        out.samples.push_back(std::move(s));
    }
    return out;
}

// Co-occurrence

Baseline parse_baseline(std::string_view s) {
    if (s == "all" || s == "all-other-docs" || s == "i") return Baseline::all_other_docs;
    if (s == "same-gender" || s == "same-gender-docs" || s == "ii") return Baseline::same_gender_docs;
    throw ConfigError("baseline must be all-other-docs or same-gender-docs, got '" + std::string(s) + "'");
}

std::string_view baseline_name(Baseline b) {
    return b == Baseline::all_other_docs ? "all-other-docs" : "same-gender-docs";
}

CooccurrenceResult cooccurrence_scan(const textprep::TermIndex& index, const CooccurrenceQuery& query) {
    const auto anchor = index.term_id(query.anchor);
    if (!anchor) throw NotFoundError("anchor term '" + query.anchor + "' not in index");
    if (query.baseline == Baseline::same_gender_docs && (!query.gender || *query.gender == Gender::unknown))
        throw ConfigError("same-gender baseline needs a gender");

    CooccurrenceResult out;
    out.anchor = query.anchor;
    out.baseline = query.baseline;
    out.gender = query.gender;

    std::unordered_map<std::uint32_t, std::uint64_t> in_anchor;
    for (std::uint32_t d : index.postings(*anchor)) {
        if (query.gender && index.doc(d).gender != *query.gender) continue;
        ++out.anchor_docs;
        for (std::uint32_t t : index.doc_terms(d)) ++in_anchor[t];
    }
    if (out.anchor_docs == 0)
        throw NotFoundError("anchor term '" + query.anchor + "' has no documents for the requested gender");

    const bool same_gender = query.baseline == Baseline::same_gender_docs;
    const std::uint64_t universe = same_gender ? index.partition_size(textprep::TermIndex::overall, *query.gender)
                                               : index.doc_count();
    out.baseline_docs = universe - out.anchor_docs;

    for (const auto& [term, a] : in_anchor) {
        if (term == *anchor) continue;
        const std::uint64_t in_universe = same_gender
                                              ? index.term_count(term, textprep::TermIndex::overall, *query.gender)
                                              : index.postings(term).size();
        const std::uint64_t c = in_universe - a;
        const stats::ContingencyTable table{a, out.anchor_docs - a, c, out.baseline_docs - c};
        if (table.degenerate()) continue;
        const auto score = stats::chi_square_2x2(table, query.policy);
        if (score.direction != stats::Direction::group1) continue;
        CooccurrenceRow row;
        row.term = index.term(term);
        row.score = score;
        row.anchor_share = static_cast<double>(a) / static_cast<double>(out.anchor_docs);
        row.baseline_share = out.baseline_docs ? static_cast<double>(c) / static_cast<double>(out.baseline_docs) : 0.0;
        out.rows.push_back(std::move(row));
    }
    std::sort(out.rows.begin(), out.rows.end(), [](const CooccurrenceRow& x, const CooccurrenceRow& y) {
        if (x.score.chi2 != y.score.chi2) return x.score.chi2 > y.score.chi2;
        return x.term < y.term;
    });
    if (query.limit && out.rows.size() > query.limit) out.rows.resize(query.limit);
    return out;
}

}  // namespace gterms::analysis
