#pragma once

#include <limits>

#include "ddempc/errors.hpp"
#include "ddempc/types.hpp"

namespace ddempc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Per-channel interval constraint lower <= v <= upper. Bounds may be infinite.
struct BoxSet {
    Vecd lower;
    Vecd upper;

    BoxSet() = default;
    BoxSet(Vecd lo, Vecd hi) : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size())
            throw DimensionError("BoxSet: lower and upper differ in size");
        for (Index i = 0; i < lower.size(); ++i)
            if (!(lower(i) <= upper(i)))
                throw ConfigError("BoxSet: lower bound exceeds upper bound");
    }

    static BoxSet symmetric(Index channels, double radius) {
        return {Vecd::Constant(channels, -radius), Vecd::Constant(channels, radius)};
    }
    static BoxSet unbounded(Index channels) {
        return {Vecd::Constant(channels, -kInf), Vecd::Constant(channels, kInf)};
    }

    Index channels() const { return lower.size(); }

    bool bounded() const { return lower.allFinite() && upper.allFinite(); }

    bool contains(const Vecd& v, double tol = 0.0) const { return violation(v) <= tol; }

    /// Largest amount by which v leaves the box (0 if inside).
    double violation(const Vecd& v) const {
        double worst = 0.0;
        for (Index i = 0; i < v.size(); ++i) {
            worst = std::max(worst, lower(i) - v(i));
            worst = std::max(worst, v(i) - upper(i));
        }
        return worst;
    }

    friend bool operator==(const BoxSet& a, const BoxSet& b) {
        return a.lower == b.lower && a.upper == b.upper;
    }
};

}  // namespace ddempc
