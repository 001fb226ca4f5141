#include "gterms/ratio.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace gterms {

Ratio Ratio::infinite(std::uint64_t numerator_count) {
    return {Kind::infinite, std::numeric_limits<double>::infinity(), numerator_count};
}

Ratio Ratio::of_counts(std::uint64_t num, std::uint64_t den, double num_weight, double den_weight) {
    if (den == 0) return num == 0 ? undefined() : infinite(num);
    return finite((static_cast<double>(num) * num_weight) / (static_cast<double>(den) * den_weight));
}

std::string Ratio::render(int decimals) const {
    switch (kind) {
        case Kind::infinite: return std::to_string(numerator_count) + "/0";
        case Kind::undefined: return "0/0";
        case Kind::finite: break;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

int compare(const Ratio& x, const Ratio& y) {
    auto rank = [](Ratio::Kind k) {
        switch (k) {
            case Ratio::Kind::infinite: return 2;
            case Ratio::Kind::finite: return 1;
            default: return 0;
        }
    };
    if (rank(x.kind) != rank(y.kind)) return rank(x.kind) < rank(y.kind) ? -1 : 1;
    if (x.kind == Ratio::Kind::infinite) {
        if (x.numerator_count == y.numerator_count) return 0;
        return x.numerator_count < y.numerator_count ? -1 : 1;
    }
    if (x.kind == Ratio::Kind::undefined || x.value == y.value) return 0;
    return x.value < y.value ? -1 : 1;
}

}  // namespace gterms
