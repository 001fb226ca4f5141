#pragma once

#include <cstdint>
#include <string>

namespace gterms {

// A count ratio that stays printable when the denominator count is zero.
// Infinite ratios render as "<numerator count>/0", the way published tables
// show gender-exclusive fields and terms.
struct Ratio {
    enum class Kind { finite, infinite, undefined };

    Kind kind = Kind::undefined;
    double value = 0.0;
    std::uint64_t numerator_count = 0;

    static Ratio finite(double v) { return {Kind::finite, v, 0}; }
    static Ratio infinite(std::uint64_t numerator_count);
    static Ratio undefined() { return {}; }

    // num_weight/den_weight from raw counts scaled by the given weights.
    static Ratio of_counts(std::uint64_t num, std::uint64_t den, double num_weight = 1.0, double den_weight = 1.0);

    bool is_finite() const { return kind == Kind::finite; }

    std::string render(int decimals = 2) const;
};

// Infinite above finite above undefined; finite ratios by value.
int compare(const Ratio& x, const Ratio& y);

}  // namespace gterms
