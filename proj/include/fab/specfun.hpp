#pragma once

// Scalar distribution functions needed by the prediction-region code:
// normal and Student-t CDFs, the noncentral chi-square CDF/quantile, and
// the quantile of ||T + b||^2 for a studentized normal vector T. Everything
// here is double precision and self-contained.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fab/rng.hpp"

namespace fab {

namespace detail {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// erfc via Cody's rational Chebyshev approximations (Math. Comp. 23, 1969),
// three intervals, relative error below 1e-15 in each.
inline double erfc_cody(double x) {
    static const double a[5] = {3.16112374387056560e00, 1.13864154151050156e02,
                                3.77485237685302021e02, 3.20937758913846947e03,
                                1.85777706184603153e-1};
    static const double b[4] = {2.36012909523441209e01, 2.44024637934444173e02,
                                1.28261652607737228e03, 2.84423683343917062e03};
    static const double c[9] = {5.64188496988670089e-1, 8.88314979438837594e00,
                                6.61191906371416295e01, 2.98635138197400131e02,
                                8.81952221241769090e02, 1.71204761263407058e03,
                                2.05107837782607147e03, 1.23033935479799725e03,
                                2.15311535474403846e-8};
    static const double d[8] = {1.57449261107098347e01, 1.17693950891312499e02,
                                5.37181101862009858e02, 1.62138957456669019e03,
                                3.29079923573345963e03, 4.36261909014324716e03,
                                3.43936767414372164e03, 1.23033935480374942e03};
    static const double p[6] = {3.05326634961232344e-1, 3.60344899949804439e-1,
                                1.25781726111229246e-1, 1.60837851487422766e-2,
                                6.58749161529837803e-4, 1.63153871373020978e-2};
    static const double q[5] = {2.56852019228982242e00, 1.87295284992346047e00,
                                5.27905102951428412e-1, 6.05183413124413191e-2,
                                2.33520497626869185e-3};
    const double y = std::fabs(x);
    double result;
    if (y <= 0.46875) {
        const double z = y > 1.11e-16 ? y * y : 0.0;
        double xnum = a[4] * z;
        double xden = z;
        for (int i = 0; i < 3; ++i) {
            xnum = (xnum + a[i]) * z;
            xden = (xden + b[i]) * z;
        }
        return 1.0 - x * (xnum + a[3]) / (xden + b[3]);
    } else if (y <= 4.0) {
        double xnum = c[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + c[i]) * y;
            xden = (xden + d[i]) * y;
        }
        result = (xnum + c[7]) / (xden + d[7]);
        // split exp(-y^2) to preserve accuracy of the large-argument tail
        const double ysq = std::trunc(y * 16.0) / 16.0;
        const double del = (y - ysq) * (y + ysq);
        result *= std::exp(-ysq * ysq) * std::exp(-del);
    } else {
        const double z = 1.0 / (y * y);
        double xnum = p[5] * z;
        double xden = z;
        for (int i = 0; i < 4; ++i) {
            xnum = (xnum + p[i]) * z;
            xden = (xden + q[i]) * z;
        }
        result = z * (xnum + p[4]) / (xden + q[4]);
        result = (5.6418958354775628695e-1 - result) / y;
        const double ysq = std::trunc(y * 16.0) / 16.0;
        const double del = (y - ysq) * (y + ysq);
        result *= std::exp(-ysq * ysq) * std::exp(-del);
    }
    return x < 0.0 ? 2.0 - result : result;
}

// Regularized lower incomplete gamma P(a,x): power series for x < a+1,
// Lentz continued fraction for the complement otherwise.
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 4000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-17) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("gamma_p: series did not converge");
}

inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 4000; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-17) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("gamma_p: continued fraction did not converge");
}

inline double gamma_p(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) {
        throw std::domain_error("gamma_p: requires a > 0 and x >= 0");
    }
    if (x == 0.0) return 0.0;
    return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

// x^a e^{-x} / Gamma(a+1); the step size in the recurrence
// P(a+1,x) = P(a,x) - x^a e^{-x}/Gamma(a+1).
inline double gamma_p_step(double a, double x) {
    if (x == 0.0) return 0.0;
    return std::exp(a * std::log(x) - x - std::lgamma(a + 1.0));
}

// Regularized incomplete beta I_x(a,b), Lentz continued fraction with the
// usual symmetry switch.
inline double beta_inc_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 4000; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-17) return h;
    }
    throw std::runtime_error("beta_inc: continued fraction did not converge");
}

inline double beta_inc(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_inc_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_inc_cf(b, a, 1.0 - x) / b;
}

}  // namespace detail

inline double norm_cdf(double x) {
    if (!std::isfinite(x)) throw std::domain_error("norm_cdf: non-finite input");
    return 0.5 * detail::erfc_cody(-x * detail::kInvSqrt2);
}

inline double norm_pdf(double x) {
    return 0.39894228040143267794 * std::exp(-0.5 * x * x);
}

// Quantile by bracketed bisection on norm_cdf; |cdf(q) - u| well below 1e-10.
inline double norm_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error("norm_quantile: u must be in (0,1)");
    }
    double lo = -40.0, hi = 40.0;
    while (hi - lo > 1e-14 * (1.0 + std::fabs(lo) + std::fabs(hi))) {
        const double mid = 0.5 * (lo + hi);
        if (norm_cdf(mid) < u) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct NoncentralChiSq {
    int df;     // degrees of freedom, >= 1
    double nc;  // noncentrality, >= 0; nc == 0 is the central chi-square

    NoncentralChiSq(int df_, double nc_) : df(df_), nc(nc_) {
        if (df < 1) throw std::domain_error("NoncentralChiSq: df must be >= 1");
        if (!(nc >= 0.0) || !std::isfinite(nc)) {
            throw std::domain_error("NoncentralChiSq: nc must be finite and >= 0");
        }
    }
};

// CDF as a Poisson mixture of central chi-square CDFs. The sum starts at the
// modal Poisson index and expands in both directions; it stops once the
// remaining Poisson mass (which bounds every remaining term) is below 1e-14.
inline double ncchisq_cdf(double x, const NoncentralChiSq& dist) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::domain_error("ncchisq_cdf: x must be finite and >= 0");
    }
    if (x == 0.0) return 0.0;
    const double a = 0.5 * dist.df;
    const double y = 0.5 * x;
    if (dist.nc == 0.0) return detail::gamma_p(a, y);

    const double lam = 0.5 * dist.nc;
    const int m = static_cast<int>(lam);
    const double wm = std::exp(m * std::log(lam) - lam - std::lgamma(m + 1.0));
    const double gm = detail::gamma_p(a + m, y);
    const double tm = detail::gamma_p_step(a + m, y);

    double sum = 0.0;
    double pois_mass = 0.0;
    // backward sweep j = m-1 .. 0 runs in full; it is finite and the stable
    // direction for the gamma recurrence
    {
        double w = wm, g = gm, t = tm;
        for (int j = m - 1; j >= 0; --j) {
            w *= (j + 1) / lam;
            t *= (a + j + 1) / y;
            g += t;
            if (g > 1.0) g = 1.0;
            sum += w * g;
            pois_mass += w;
        }
    }
    // forward sweep j = m, m+1, ... until the remaining Poisson mass, which
    // bounds every remaining term, drops below 1e-14. Past the mode the
    // weights decay at least geometrically, giving a tail bound that is
    // immune to rounding in the accumulated mass.
    {
        double w = wm, g = gm, t = tm;
        for (int j = m;; ++j) {
            sum += w * g;
            pois_mass += w;
            if (1.0 - pois_mass < 1e-14) break;
            w *= lam / (j + 1);
            if (j + 1 > lam) {
                const double ratio = lam / (j + 2);
                if (w / (1.0 - ratio) < 1e-14) break;
            }
            if (j - m > 100000) {
                throw std::runtime_error("ncchisq_cdf: series did not converge");
            }
            g -= t;
            if (g < 0.0) g = 0.0;
            t *= y / (a + j + 1);
        }
    }
    return std::min(sum, 1.0);
}

// Quantile by bracketed bisection on the CDF. The initial bracket
// [0, nc + df + 40*sqrt(nc + df)] is widened in the rare case the target
// mass lies beyond it.
inline double ncchisq_quantile(double u, const NoncentralChiSq& dist) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error("ncchisq_quantile: u must be in (0,1)");
    }
    const double m = dist.nc + dist.df;
    double hi = m + 40.0 * std::sqrt(m);
    int guard = 0;
    while (ncchisq_cdf(hi, dist) < u) {
        hi *= 2.0;
        if (++guard > 60) {
            throw std::runtime_error("ncchisq_quantile: failed to bracket");
        }
    }
    double lo = 0.0;
    double q = 0.5 * hi;
    for (int i = 0; i < 300; ++i) {
        q = 0.5 * (lo + hi);
        const double f = ncchisq_cdf(q, dist);
        if (std::fabs(f - u) < 1e-11) break;
        if (f < u) {
            lo = q;
        } else {
            hi = q;
        }
        if (hi - lo < 1e-13 * (1.0 + hi)) break;
    }
    return q;
}

// Student-t CDF through the regularized incomplete beta function.
inline double t_cdf(double x, int df) {
    if (df < 1) throw std::domain_error("t_cdf: df must be >= 1");
    if (!std::isfinite(x)) throw std::domain_error("t_cdf: non-finite input");
    if (x == 0.0) return 0.5;
    const double tail = 0.5 * detail::beta_inc(0.5 * df, 0.5, df / (df + x * x));
    return x > 0.0 ? 1.0 - tail : tail;
}

// 1-u quantile machinery for ||T + b||^2 where T is the studentized normal
// contrast Shat^{-1/2} (X - Y)/sqrt(k+1) given Z, with nu*Shat Wishart. In one
// dimension T is t_nu and the quantile solves
// F_nu(sqrt(q) - b) - F_nu(-sqrt(q) - b) = u; in higher dimensions it is the
// empirical quantile of seeded Monte Carlo draws built from that definition.
inline double shifted_t_sq_quantile(const std::vector<double>& b, double u, int df,
                                    long reps, std::uint64_t seed) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error("shifted_t_sq_quantile: u must be in (0,1)");
    }
    if (df < 1) throw std::domain_error("shifted_t_sq_quantile: df must be >= 1");
    if (reps < 10000) {
        throw std::invalid_argument("shifted_t_sq_quantile: reps must be >= 10000");
    }
    if (b.empty()) throw std::invalid_argument("shifted_t_sq_quantile: b must be nonempty");

    const int p = static_cast<int>(b.size());
    if (p == 1) {
        const double beta = std::fabs(b[0]);
        auto mass = [&](double s) {
            return t_cdf(s - beta, df) - t_cdf(-s - beta, df);
        };
        double hi = beta + 50.0;
        int guard = 0;
        while (mass(hi) < u) {
            hi *= 2.0;
            if (++guard > 60) {
                throw std::runtime_error("shifted_t_sq_quantile: failed to bracket");
            }
        }
        double lo = 0.0;
        double s = 0.5 * hi;
        for (int i = 0; i < 300; ++i) {
            s = 0.5 * (lo + hi);
            const double f = mass(s);
            if (std::fabs(f - u) < 1e-12) break;
            if (f < u) {
                lo = s;
            } else {
                hi = s;
            }
            if (hi - lo < 1e-14 * (1.0 + hi)) break;
        }
        return s * s;
    }

    // p > 1: draw T = chol(Shat^{-1}) w with w ~ N(0, I) and nu*Shat Wishart
    // via the Bartlett factor, then take the empirical u-quantile of ||T+b||^2.
    RngStream rng = RngStream::substream(seed, 0x73686966746564ULL);
    std::vector<double> lower(static_cast<std::size_t>(p) * p);  // row-major work space
    std::vector<double> inv_lower(lower.size());
    std::vector<double> prec(lower.size());
    std::vector<double> w(p), t(p);
    std::vector<double> draws(static_cast<std::size_t>(reps));
    auto at = [p](std::vector<double>& mat, int i, int j) -> double& {
        return mat[static_cast<std::size_t>(i) * p + j];
    };

    for (long r = 0; r < reps; ++r) {
        // Bartlett factor A of Wishart(df, I): A A^T ~ W_p(df, I)
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j < i; ++j) at(lower, i, j) = rng.normal();
            at(lower, i, i) = std::sqrt(rng.chisq(df - i));
            for (int j = i + 1; j < p; ++j) at(lower, i, j) = 0.0;
        }
        // inv_lower = A^{-1} by forward substitution
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = (i == j) ? 1.0 : 0.0;
                for (int l = j; l < i; ++l) s -= at(lower, i, l) * at(inv_lower, l, j);
                at(inv_lower, i, j) = s / at(lower, i, i);
            }
            for (int j = i + 1; j < p; ++j) at(inv_lower, i, j) = 0.0;
        }
        // Shat^{-1} = df * A^{-T} A^{-1}
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = 0.0;
                for (int l = std::max(i, j); l < p; ++l) {
                    s += at(inv_lower, l, i) * at(inv_lower, l, j);
                }
                at(prec, i, j) = df * s;
                at(prec, j, i) = df * s;
            }
        }
        // G = chol(Shat^{-1}), lower
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = at(prec, i, j);
                for (int l = 0; l < j; ++l) s -= at(lower, i, l) * at(lower, j, l);
                if (i == j) {
                    if (!(s > 0.0)) {
                        throw std::runtime_error("shifted_t_sq_quantile: Cholesky failed");
                    }
                    at(lower, i, i) = std::sqrt(s);
                } else {
                    at(lower, i, j) = s / at(lower, j, j);
                }
            }
        }
        for (int i = 0; i < p; ++i) w[i] = rng.normal();
        double norm2 = 0.0;
        for (int i = 0; i < p; ++i) {
            double s = 0.0;
            for (int j = 0; j <= i; ++j) s += at(lower, i, j) * w[j];
            const double c = s + b[static_cast<std::size_t>(i)];
            norm2 += c * c;
        }
        draws[static_cast<std::size_t>(r)] = norm2;
    }
    std::sort(draws.begin(), draws.end());
    long idx = static_cast<long>(std::ceil(u * static_cast<double>(reps))) - 1;
    idx = std::clamp(idx, 0L, reps - 1);
    return draws[static_cast<std::size_t>(idx)];
}

}  // namespace fab
