#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace gterms::stats {

// Document counts: a/b = group 1 with/without the term, c/d = group 2
// with/without the term.
struct ContingencyTable {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::uint64_t c = 0;
    std::uint64_t d = 0;

    std::uint64_t total() const { return a + b + c + d; }
    // Degenerate iff any row or column margin is zero.
    bool degenerate() const { return a + b == 0 || c + d == 0 || a + c == 0 || b + d == 0; }
    // Row and column swap together: exchanges the two groups.
    ContingencyTable swapped_groups() const { return {c, d, a, b}; }
    // Expected count of the given cell (0=a .. 3=d) under independence.
    double expected(int cell) const;
    double min_expected() const;

    bool operator==(const ContingencyTable&) const = default;
};

enum class CorrectionPolicy {
    auto_yates,  // Yates iff some expected count < 5
    never,
    always,
};

CorrectionPolicy parse_policy(std::string_view s);
std::string_view policy_name(CorrectionPolicy p);

enum class Direction { group1, group2, none };

struct AssociationScore {
    ContingencyTable table;
    double chi2 = 0.0;
    Direction direction = Direction::none;
    double p_value = 1.0;
    bool correction_applied = false;
};

// Pearson chi-squared via N(ad-bc)^2 / product of margins, with Yates'
// continuity correction per `policy` (clamped at zero). Throws DomainError on
// a degenerate table.
AssociationScore chi_square_2x2(const ContingencyTable& table, CorrectionPolicy policy = CorrectionPolicy::auto_yates);

// Upper tail of chi-square with one degree of freedom: erfc(sqrt(x/2)).
double chi_square_pvalue(double chi2);

// Step-up procedure: largest k with p_(k) <= k*alpha/m; returns the original
// indices of the k smallest p-values, ascending.
std::vector<std::size_t> benjamini_hochberg(std::span<const double> p_values, double alpha);

// Indices with p <= alpha/m, ascending.
std::vector<std::size_t> bonferroni(std::span<const double> p_values, double alpha);

// P(X >= t) for X ~ Binomial(n, p), summed exactly in log space.
double binomial_tail(std::uint64_t n, double p, std::uint64_t t);

// P(X <= t), summed independently of binomial_tail.
double binomial_cdf(std::uint64_t n, double p, std::uint64_t t);

// Null model for a cross-field tally: how likely is any of `vocab_size`
// eligible terms to reach `threshold` top-list hits among `fields` fields by
// chance, each hit having probability `hit_probability`.
struct BinomialModel {
    std::uint64_t fields = 285;
    double hit_probability = 20.0 / 2613.0;
    std::uint64_t threshold = 17;
    std::uint64_t vocab_size = 2783;
    double overlap = 2.2;  // mean categories per journal

    void validate() const;
};

struct UnionBound {
    std::uint64_t fields = 0;
    std::uint64_t threshold = 0;
    double per_term = 0.0;
    double probability = 0.0;  // min(1, vocab_size * per_term)
};

// Unadjusted: fields and threshold as given. Adjusted for journal overlap:
// both divided by `overlap` and rounded to nearest (285/2.2 -> 130,
// 17/2.2 -> 8).
UnionBound tally_union_bound(const BinomialModel& model, bool adjusted);

}  // namespace gterms::stats
