#pragma once

#include "gterms/ingest.hpp"
#include "gterms/labels.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gterms::textprep {

// Tokens are maximal runs of letters, digits, combining marks, hyphens and
// apostrophes, lowercased, with leading/trailing hyphens and apostrophes
// stripped. Typographic apostrophes and hyphens are folded to ASCII.
struct TokenRules {
    bool keep_hyphens = true;
    bool keep_apostrophes = true;
    bool lowercase = true;
    std::size_t min_length = 1;  // in code points
};

struct TokenSpan {
    std::string term;
    std::size_t offset = 0;  // byte offset into the NFC text
    std::size_t length = 0;  // byte length in the NFC text
};

// `text` must already be NFC-normalized.
std::vector<TokenSpan> tokenize_spans(std::string_view text, const TokenRules& rules = {});

// NFC-normalizes, then returns the set of distinct terms.
std::set<std::string> tokenize(std::string_view text, const TokenRules& rules = {});

enum class DepluralMode { conditional, always, off };

DepluralMode parse_deplural(std::string_view s);
std::string_view deplural_name(DepluralMode m);

// True when the term has the shape of an s-plural that may lose its "s":
// ends in "s", not in "ss" or "'s", and keeps at least three code points.
bool plural_shaped(std::string_view term);

// Strips one trailing "s" from plural-shaped terms; in conditional mode only
// when the stem occurs as a raw token in `vocabulary`.
std::string depluralize(std::string_view term, const std::unordered_set<std::string>& vocabulary,
                        DepluralMode mode = DepluralMode::conditional);

// One term per line; blank lines and lines starting with '#' ignored.
std::set<std::string> load_stoplist(const std::filesystem::path& path);

struct TextOptions {
    TokenRules rules;
    DepluralMode deplural = DepluralMode::conditional;
    std::set<std::string> stoplist;
};

// Document -> final term set, given the raw-token vocabulary of the corpus.
std::set<std::string> document_terms(std::string_view text, const TextOptions& options,
                                     const std::unordered_set<std::string>& vocabulary);

struct IndexedDoc {
    std::string article_id;
    Gender gender = Gender::unknown;
    std::vector<std::string> field_codes;
};

struct TermCounts {
    std::uint32_t term = 0;
    std::uint32_t female = 0;
    std::uint32_t male = 0;

    std::uint32_t count(Gender g) const { return g == Gender::female ? female : male; }
};

// Document-term incidence, partitioned by (narrow field, gender) plus the
// whole-corpus scope `overall`. An article contributes at most once to any
// term count.
class TermIndex {
public:
    static constexpr std::string_view overall = "*";

    // Unknown-gender records are skipped; per-field input is deduplicated
    // first. Throws DataError on a field code absent from the catalog.
    static TermIndex build(const ingest::Corpus& corpus, const GenderLabels& labels,
                           const ingest::FieldCatalog& catalog, const TextOptions& options = {});

    std::size_t doc_count() const { return docs_.size(); }
    const IndexedDoc& doc(std::uint32_t ordinal) const { return docs_.at(ordinal); }
    std::optional<std::uint32_t> find_doc(std::string_view article_id) const;

    // Sorted vocabulary; a term id is its position.
    const std::vector<std::string>& terms() const { return terms_; }
    std::optional<std::uint32_t> term_id(std::string_view term) const;
    const std::string& term(std::uint32_t id) const { return terms_.at(id); }

    // Ordinals of documents containing the term, ascending.
    std::span<const std::uint32_t> postings(std::uint32_t term) const { return postings_.at(term); }
    // Term ids of a document, ascending.
    std::span<const std::uint32_t> doc_terms(std::uint32_t ordinal) const { return forward_.at(ordinal); }

    // Field codes having at least one indexed document, sorted.
    std::vector<std::string> fields() const;
    bool has_scope(std::string_view scope) const { return partitions_.count(std::string(scope)) > 0; }

    std::uint64_t partition_size(std::string_view scope, Gender g) const;
    std::uint64_t term_count(std::uint32_t term, std::string_view scope, Gender g) const;
    // Article ids of one partition containing the term, ascending.
    std::vector<std::string> article_ids(std::uint32_t term, std::string_view scope, Gender g) const;
    // Every term present in the scope with its per-gender document counts,
    // ordered by term id.
    std::span<const TermCounts> scope_terms(std::string_view scope) const;

    const TextOptions& options() const { return options_; }

    // Versioned JSON snapshot; from_snapshot reproduces identical counts.
    nlohmann::json snapshot() const;
    static TermIndex from_snapshot(const nlohmann::json& j);

    static constexpr int snapshot_version = 1;

private:
    struct Partition {
        std::uint64_t female_docs = 0;
        std::uint64_t male_docs = 0;
        std::vector<TermCounts> counts;
    };

    void build_partitions();
    const Partition& partition(std::string_view scope) const;

    TextOptions options_;
    std::vector<IndexedDoc> docs_;
    std::vector<std::string> terms_;
    std::vector<std::vector<std::uint32_t>> postings_;
    std::vector<std::vector<std::uint32_t>> forward_;
    std::unordered_map<std::string, Partition> partitions_;
};

}  // namespace gterms::textprep
