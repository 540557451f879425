#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "fab/specfun.hpp"
#include "oracles.hpp"

using Catch::Approx;

TEST_CASE("norm_cdf golden values and shape", "[specfun]") {
    CHECK(fab::norm_cdf(0.0) == Approx(0.5).margin(1e-15));

    // frozen from the erf series oracle
    const double phi95 = static_cast<double>(oracle::norm_cdf_series(1.644854L));
    CHECK(phi95 == Approx(0.95).margin(1e-6));
    CHECK(fab::norm_cdf(1.644854) == Approx(phi95).margin(1e-13));
    CHECK(fab::norm_cdf(1.644854) == Approx(0.95).margin(1e-7));

    const double far_tail = fab::norm_cdf(-37.0);
    CHECK(far_tail >= 0.0);
    CHECK(far_tail < 1e-200);

    double prev = -1.0;
    for (double x = -8.0; x <= 8.0; x += 0.25) {
        const double c = fab::norm_cdf(x);
        CHECK(c > prev);
        prev = c;
        CHECK(fab::norm_cdf(x) + fab::norm_cdf(-x) == Approx(1.0).margin(1e-14));
    }

    CHECK_THROWS_AS(fab::norm_cdf(std::numeric_limits<double>::quiet_NaN()),
                    std::domain_error);
    CHECK_THROWS_AS(fab::norm_cdf(std::numeric_limits<double>::infinity()),
                    std::domain_error);
}

TEST_CASE("norm_cdf matches the series oracle on a grid", "[specfun]") {
    for (double x = -5.5; x <= 5.5; x += 0.37) {
        const double ref = static_cast<double>(oracle::norm_cdf_series(x));
        CHECK(fab::norm_cdf(x) == Approx(ref).margin(1e-13));
    }
}

TEST_CASE("norm_quantile golden values and round trip", "[specfun]") {
    CHECK(fab::norm_quantile(0.5) == Approx(0.0).margin(1e-12));
    CHECK(fab::norm_quantile(0.95) == Approx(1.644854).margin(1e-6));
    CHECK(fab::norm_quantile(0.975) == Approx(1.959964).margin(1e-6));

    for (int i = 1; i <= 99; ++i) {
        const double u = i / 100.0;
        CHECK(fab::norm_cdf(fab::norm_quantile(u)) == Approx(u).margin(1e-10));
    }

    CHECK_THROWS_AS(fab::norm_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(fab::norm_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(fab::norm_quantile(-0.2), std::domain_error);
}

TEST_CASE("ncchisq_cdf golden values", "[specfun]") {
    const fab::NoncentralChiSq central1(1, 0.0);
    CHECK(fab::ncchisq_cdf(0.0, central1) == 0.0);
    CHECK(fab::ncchisq_cdf(0.0, fab::NoncentralChiSq(3, 2.5)) == 0.0);

    // frozen via the incomplete gamma oracle: P(chi2_1 <= 2.705543)
    const double ref = static_cast<double>(oracle::gamma_p_ref(0.5L, 0.5L * 2.705543L));
    CHECK(ref == Approx(0.90).margin(1e-6));
    CHECK(fab::ncchisq_cdf(2.705543, central1) == Approx(ref).margin(1e-12));
    CHECK(fab::ncchisq_cdf(2.705543, central1) == Approx(0.90).margin(1e-8));

    CHECK_THROWS_AS(fab::ncchisq_cdf(-0.5, central1), std::domain_error);
}

TEST_CASE("ncchisq_cdf central case agrees with the gamma oracle", "[specfun]") {
    for (int df : {1, 2, 5}) {
        for (double x : {0.1, 1.0, 5.0, 20.0}) {
            const double ref =
                static_cast<double>(oracle::gamma_p_ref(0.5L * df, 0.5L * x));
            CHECK(fab::ncchisq_cdf(x, fab::NoncentralChiSq(df, 0.0)) ==
                  Approx(ref).margin(1e-10));
        }
    }
}

TEST_CASE("ncchisq_cdf df=1 noncentral identity", "[specfun]") {
    // CDF(x; 1, delta^2) = Phi(sqrt(x) - delta) - Phi(-sqrt(x) - delta)
    for (double delta : {0.5, 1.0, 2.0, 3.5}) {
        const fab::NoncentralChiSq dist(1, delta * delta);
        for (double x : {0.25, 1.0, 2.0, 4.0, 9.0, 16.0}) {
            const double s = std::sqrt(x);
            const double ref = fab::norm_cdf(s - delta) - fab::norm_cdf(-s - delta);
            CHECK(fab::ncchisq_cdf(x, dist) == Approx(ref).margin(1e-10));
        }
    }
}

TEST_CASE("ncchisq_cdf monotone in x, decreasing in nc", "[specfun]") {
    const fab::NoncentralChiSq d(3, 2.0);
    double prev = -1.0;
    for (double x = 0.0; x <= 30.0; x += 0.5) {
        const double c = fab::ncchisq_cdf(x, d);
        CHECK(c >= prev);
        prev = c;
    }
    for (double x : {1.0, 4.0, 10.0}) {
        double prev_nc = 2.0;
        for (double nc : {0.0, 0.5, 2.0, 5.0, 20.0}) {
            const double c = fab::ncchisq_cdf(x, fab::NoncentralChiSq(3, nc));
            CHECK(c <= prev_nc + 1e-14);
            prev_nc = c;
        }
    }
}

TEST_CASE("ncchisq_quantile golden values and monotonicity", "[specfun]") {
    // frozen via the incomplete gamma oracle
    const double q1 = static_cast<double>(oracle::chisq_quantile_ref(0.9L, 1));
    CHECK(q1 == Approx(2.705543).margin(1e-5));
    CHECK(fab::ncchisq_quantile(0.9, fab::NoncentralChiSq(1, 0.0)) ==
          Approx(q1).margin(1e-8));

    // closed form -2 ln(0.1) for df = 2
    CHECK(fab::ncchisq_quantile(0.9, fab::NoncentralChiSq(2, 0.0)) ==
          Approx(-2.0 * std::log(0.1)).margin(1e-5));

    CHECK(fab::ncchisq_quantile(0.9, fab::NoncentralChiSq(1, 1.0)) > 2.705543);

    double prev = 0.0;
    for (double nc : {0.0, 0.5, 1.0, 4.0, 16.0}) {
        const double q = fab::ncchisq_quantile(0.9, fab::NoncentralChiSq(2, nc));
        CHECK(q > prev);
        prev = q;
    }
    prev = 0.0;
    for (int df : {1, 2, 3, 8}) {
        const double q = fab::ncchisq_quantile(0.9, fab::NoncentralChiSq(df, 1.5));
        CHECK(q > prev);
        prev = q;
    }

    CHECK_THROWS_AS(fab::ncchisq_quantile(0.0, fab::NoncentralChiSq(1, 0.0)),
                    std::domain_error);
    CHECK_THROWS_AS(fab::ncchisq_quantile(1.0, fab::NoncentralChiSq(1, 0.0)),
                    std::domain_error);
}

TEST_CASE("t_cdf golden values and limits", "[specfun]") {
    CHECK(fab::t_cdf(0.0, 5) == Approx(0.5).margin(1e-15));

    // frozen via the incomplete beta series oracle
    const double ref5 = static_cast<double>(oracle::t_cdf_ref(2.015048L, 5));
    CHECK(ref5 == Approx(0.95).margin(1e-6));
    CHECK(fab::t_cdf(2.015048, 5) == Approx(ref5).margin(1e-12));
    CHECK(fab::t_cdf(2.015048, 5) == Approx(0.95).margin(1e-6));

    // df = 1 closed form: 1/2 + atan(x)/pi
    const double cauchy = 0.5 + std::atan(12.706205) / M_PI;
    CHECK(fab::t_cdf(12.706205, 1) == Approx(cauchy).margin(1e-12));
    CHECK(fab::t_cdf(12.706205, 1) == Approx(0.975).margin(1e-6));

    for (double x = -4.0; x <= 4.0; x += 0.5) {
        CHECK(fab::t_cdf(x, 7) + fab::t_cdf(-x, 7) == Approx(1.0).margin(1e-13));
        CHECK(fab::t_cdf(x, 1000000) == Approx(fab::norm_cdf(x)).margin(1e-5));
    }

    CHECK_THROWS_AS(fab::t_cdf(1.0, 0), std::domain_error);
}

TEST_CASE("quantile/cdf round trips across families", "[specfun]") {
    for (int i = 1; i <= 99; ++i) {
        const double u = i / 100.0;
        CHECK(fab::norm_cdf(fab::norm_quantile(u)) == Approx(u).margin(1e-9));
        for (const auto& [df, nc] :
             std::vector<std::pair<int, double>>{{1, 0.0}, {2, 0.0}, {1, 2.5}, {4, 7.0}}) {
            const fab::NoncentralChiSq d(df, nc);
            CHECK(fab::ncchisq_cdf(fab::ncchisq_quantile(u, d), d) ==
                  Approx(u).margin(1e-9));
        }
    }
}

TEST_CASE("shifted_t_sq_quantile analytic one-dimensional case", "[specfun]") {
    // b = 0 reduces to the squared two-sided t quantile
    const double q = fab::shifted_t_sq_quantile({0.0}, 0.9, 5, 10000, 1);
    CHECK(q == Approx(2.015048 * 2.015048).margin(1e-4));

    // large df approaches the chi-square quantile
    const double q_big = fab::shifted_t_sq_quantile({0.0}, 0.9, 2000000, 10000, 1);
    CHECK(q_big == Approx(2.7055).margin(0.01));

    // strictly larger under a shift
    CHECK(fab::shifted_t_sq_quantile({3.0}, 0.9, 5, 10000, 1) > q);

    CHECK_THROWS_AS(fab::shifted_t_sq_quantile({0.0}, 0.9, 5, 100, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(fab::shifted_t_sq_quantile({0.0}, 1.5, 5, 10000, 1),
                    std::domain_error);
}

TEST_CASE("shifted_t_sq_quantile Monte Carlo path is seeded and sane", "[specfun]") {
    const std::vector<double> b = {1.0, -0.5};
    const double q1 = fab::shifted_t_sq_quantile(b, 0.9, 30, 20000, 42);
    const double q2 = fab::shifted_t_sq_quantile(b, 0.9, 30, 20000, 42);
    CHECK(q1 == q2);  // bit-identical across runs with the same seed

    // with many degrees of freedom, ||T + b||^2 is close to noncentral chi-square
    const double q_mc = fab::shifted_t_sq_quantile(b, 0.9, 5000, 200000, 7);
    const double q_ref =
        fab::ncchisq_quantile(0.9, fab::NoncentralChiSq(2, 1.0 + 0.25));
    CHECK(q_mc == Approx(q_ref).epsilon(0.05));
}
