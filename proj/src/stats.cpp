#include "gterms/stats.hpp"

#include "gterms/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gterms::stats {

double ContingencyTable::expected(int cell) const {
    const double n = static_cast<double>(total());
    const double row = static_cast<double>(cell < 2 ? a + b : c + d);
    const double col = static_cast<double>(cell % 2 == 0 ? a + c : b + d);
    return row * col / n;
}

double ContingencyTable::min_expected() const {
    return std::min({expected(0), expected(1), expected(2), expected(3)});
}

CorrectionPolicy parse_policy(std::string_view s) {
    if (s == "auto") return CorrectionPolicy::auto_yates;
    if (s == "never") return CorrectionPolicy::never;
    if (s == "always") return CorrectionPolicy::always;
    throw ConfigError("correction policy must be auto, never or always, got '" + std::string(s) + "'");
}

std::string_view policy_name(CorrectionPolicy p) {
    switch (p) {
        case CorrectionPolicy::never: return "never";
        case CorrectionPolicy::always: return "always";
        default: return "auto";
    }
}

AssociationScore chi_square_2x2(const ContingencyTable& t, CorrectionPolicy policy) {
    if (t.degenerate())
        throw DomainError("degenerate 2x2 table (" + std::to_string(t.a) + "," + std::to_string(t.b) + "," +
                          std::to_string(t.c) + "," + std::to_string(t.d) + ")");
    AssociationScore s;
    s.table = t;

    const double n = static_cast<double>(t.total());
    const double a = static_cast<double>(t.a);
    const double b = static_cast<double>(t.b);
    const double c = static_cast<double>(t.c);
    const double d = static_cast<double>(t.d);
    const double margins = (a + b) * (c + d) * (a + c) * (b + d);
    const double diff = std::fabs(a * d - b * c);

    s.correction_applied = policy == CorrectionPolicy::always ||
                           (policy == CorrectionPolicy::auto_yates && t.min_expected() < 5.0);
    double numer = diff;
    if (s.correction_applied) numer = std::max(0.0, diff - n / 2.0);
    s.chi2 = n * numer * numer / margins;

    // a*N vs (a+b)(a+c), exact in 128 bits.
    using u128 = unsigned __int128;
    const u128 observed = static_cast<u128>(t.a) * t.total();
    const u128 expected = static_cast<u128>(t.a + t.b) * (t.a + t.c);
    s.direction = observed > expected ? Direction::group1 : observed < expected ? Direction::group2 : Direction::none;
    s.p_value = chi_square_pvalue(s.chi2);
    return s;
}

double chi_square_pvalue(double chi2) {
    if (!(chi2 >= 0.0)) throw DomainError("chi-squared statistic must be non-negative");
    return std::erfc(std::sqrt(chi2 / 2.0));
}

namespace {

void check_p_values(std::span<const double> p_values, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (p_values.empty()) throw DomainError("no p-values supplied");
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p-value outside [0, 1]");
}

}  // namespace

std::vector<std::size_t> benjamini_hochberg(std::span<const double> p_values, double alpha) {
    check_p_values(p_values, alpha);
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return p_values[x] < p_values[y]; });
    std::size_t k = 0;
    for (std::size_t rank = m; rank >= 1; --rank) {
        if (p_values[order[rank - 1]] <= static_cast<double>(rank) * alpha / static_cast<double>(m)) {
            k = rank;
            break;
        }
    }
    std::vector<std::size_t> rejected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(rejected.begin(), rejected.end());
    return rejected;
}

std::vector<std::size_t> bonferroni(std::span<const double> p_values, double alpha) {
    check_p_values(p_values, alpha);
    const double cut = alpha / static_cast<double>(p_values.size());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < p_values.size(); ++i)
        if (p_values[i] <= cut) out.push_back(i);
    return out;
}

namespace {

void check_binomial(std::uint64_t n, double p, std::uint64_t t) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial probability outside [0, 1]");
    if (t > n) throw DomainError("binomial threshold exceeds number of trials");
}

double log_pmf(std::uint64_t n, std::uint64_t k, double log_p, double log_q) {
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    return std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) + kk * log_p +
           (nn - kk) * log_q;
}

// Sum of pmf(k) for k in [lo, hi], via log-sum-exp.
double pmf_sum(std::uint64_t n, double p, std::uint64_t lo, std::uint64_t hi) {
    if (p == 0.0) return lo == 0 ? 1.0 : 0.0;
    if (p == 1.0) return hi == n ? 1.0 : 0.0;
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    std::vector<double> logs;
    logs.reserve(hi - lo + 1);
    for (std::uint64_t k = lo; k <= hi; ++k) logs.push_back(log_pmf(n, k, log_p, log_q));
    const double peak = *std::max_element(logs.begin(), logs.end());
    // Small terms first.
    std::sort(logs.begin(), logs.end());
    double sum = 0.0;
    for (double l : logs) sum += std::exp(l - peak);
    return std::min(1.0, std::exp(peak) * sum);
}

}  // namespace

double binomial_tail(std::uint64_t n, double p, std::uint64_t t) {
    check_binomial(n, p, t);
    if (t == 0) return 1.0;
    return pmf_sum(n, p, t, n);
}

double binomial_cdf(std::uint64_t n, double p, std::uint64_t t) {
    check_binomial(n, p, t);
    if (t == n) return 1.0;
    return pmf_sum(n, p, 0, t);
}

void BinomialModel::validate() const {
    if (!(hit_probability > 0.0 && hit_probability < 1.0)) throw DomainError("hit probability must lie in (0, 1)");
    if (threshold > fields) throw DomainError("tally threshold exceeds number of fields");
    if (!(overlap >= 1.0)) throw DomainError("journal overlap must be at least 1");
}

UnionBound tally_union_bound(const BinomialModel& model, bool adjusted) {
    model.validate();
    UnionBound out;
    out.fields = model.fields;
    out.threshold = model.threshold;
    if (adjusted) {
        out.fields = static_cast<std::uint64_t>(std::llround(static_cast<double>(model.fields) / model.overlap));
        out.threshold = static_cast<std::uint64_t>(std::llround(static_cast<double>(model.threshold) / model.overlap));
        out.threshold = std::min(out.threshold, out.fields);
    }
    out.per_term = binomial_tail(out.fields, model.hit_probability, out.threshold);
    out.probability = std::min(1.0, static_cast<double>(model.vocab_size) * out.per_term);
    return out;
}

}  // namespace gterms::stats
