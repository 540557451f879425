#pragma once

// Implicit critical values: solve F(q - delta) - F(-q - delta) = 1 - alpha
// for the two-sided acceptance threshold of a unit-scale reference law that
// is tested against a shifted alternative.

#include <cmath>
#include <stdexcept>

#include "fab/specfun.hpp"

namespace fab {

// Reference CDF for the critical-value equation: standard normal or t(df).
struct CriticalCdf {
    enum class Kind { normal, student_t };
    Kind kind = Kind::normal;
    int df = 0;

    static CriticalCdf normal() { return {Kind::normal, 0}; }
    static CriticalCdf student_t(int df) {
        if (df < 1) throw std::domain_error("CriticalCdf: df must be >= 1");
        return {Kind::student_t, df};
    }

    double operator()(double x) const {
        return kind == Kind::normal ? norm_cdf(x) : t_cdf(x, df);
    }
};

// Bisection on [0, |delta| + norm_quantile(1 - alpha/4) + 10], widened if the
// reference tails are too heavy for that bracket. The solution is symmetric
// in delta and nondecreasing in |delta|.
inline double solve_critical_q(double delta, double alpha, const CriticalCdf& cdf) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("solve_critical_q: alpha must be in (0,1)");
    }
    if (!std::isfinite(delta)) {
        throw std::domain_error("solve_critical_q: non-finite delta");
    }
    const double d = std::fabs(delta);
    const double level = 1.0 - alpha;
    auto mass = [&](double q) { return cdf(q - d) - cdf(-q - d); };

    double hi = d + norm_quantile(1.0 - alpha / 4.0) + 10.0;
    int guard = 0;
    while (mass(hi) < level) {
        hi *= 2.0;
        if (++guard > 60) {
            throw std::runtime_error("solve_critical_q: failed to bracket");
        }
    }
    double lo = 0.0;
    double q = 0.5 * hi;
    for (int i = 0; i < 300; ++i) {
        q = 0.5 * (lo + hi);
        const double f = mass(q);
        if (std::fabs(f - level) < 1e-11) break;
        if (f < level) {
            lo = q;
        } else {
            hi = q;
        }
        if (hi - lo < 1e-14 * (1.0 + hi)) break;
    }
    return q;
}

// Two-sided quantile of the centered reference law (delta = 0 case).
inline double two_sided_quantile(double alpha, const CriticalCdf& cdf) {
    return solve_critical_q(0.0, alpha, cdf);
}

}  // namespace fab
