#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <limits>

#include "fab/experiments.hpp"
#include "fab/figures.hpp"
#include "fab/mc.hpp"

using Catch::Approx;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("replicate engine is deterministic given the seed", "[mc]") {
    auto fn = [](fab::RngStream& rng) { return rng.normal(); };
    const fab::SimReport a = fab::run_replicates(fn, 5000, 11, fab::Quantity::expected_measure, "x");
    const fab::SimReport b = fab::run_replicates(fn, 5000, 11, fab::Quantity::expected_measure, "x");
    CHECK(a.estimate == b.estimate);  // bit identical
    CHECK(a.std_error == b.std_error);
    CHECK(a.seed == 11);
    CHECK(a.n_reps == 5000);
    CHECK(a.config_digest == "x");

    const fab::SimReport c = fab::run_replicates(fn, 5000, 12, fab::Quantity::expected_measure, "x");
    CHECK(c.estimate != a.estimate);
}

TEST_CASE("estimates do not depend on the thread split", "[mc]") {
    auto fn = [](fab::RngStream& rng) { return rng.uniform() < 0.9 ? 1.0 : 0.0; };
    setenv("FAB_THREADS", "1", 1);
    const fab::SimReport serial = fab::run_replicates(fn, 20001, 7, fab::Quantity::coverage, "t");
    setenv("FAB_THREADS", "4", 1);
    const fab::SimReport parallel = fab::run_replicates(fn, 20001, 7, fab::Quantity::coverage, "t");
    unsetenv("FAB_THREADS");
    CHECK(serial.estimate == parallel.estimate);  // bit identical across splits
    CHECK(serial.std_error == parallel.std_error);
}

TEST_CASE("pivotal interval coverage and risk", "[mc]") {
    const fab::SimReport cov = fab::estimate_coverage_pivotal_1d(1.0, 1.0, 0.1, 2.7, 100000, 909);
    CHECK(cov.estimate == Approx(0.9).margin(3.0 * std::sqrt(0.9 * 0.1 / 100000)));
    CHECK(cov.quantity == fab::Quantity::coverage);

    // constant width: zero replicate variance
    fab::NormalFabConfig pivotal(1.0, 1.0, 0.0, kInf, 0.1);
    const fab::SimReport risk = fab::estimate_risk_normal_1d(pivotal, 0.0, 200, 910, 2048);
    CHECK(risk.estimate == Approx(4.65235).margin(1e-4));
    CHECK(risk.std_error < 1e-6);
}

TEST_CASE("informative-prior risk crosses the pivotal risk", "[mc]") {
    fab::NormalFabConfig informative(1.0, 1.0, 0.0, 1.0, 0.1);
    const double pivotal_width = 2.0 * std::sqrt(2.0) * fab::norm_quantile(0.95);
    const fab::SimReport near = fab::estimate_risk_normal_1d(informative, 0.0, 400, 911, 256);
    const fab::SimReport far = fab::estimate_risk_normal_1d(informative, 6.0, 400, 912, 256);
    CHECK(near.estimate + 3.0 * near.std_error < pivotal_width);
    CHECK(far.estimate - 3.0 * far.std_error > pivotal_width);
}

TEST_CASE("FAB coverage holds far from the prior", "[mc]") {
    fab::NormalFabConfig informative(1.0, 1.0, 0.0, 1.0, 0.1);
    const fab::SimReport rep = fab::estimate_coverage_normal(
        informative, Eigen::VectorXd::Constant(1, 5.0), 100000, 913);
    CHECK(rep.estimate == Approx(0.9).margin(3.0 * std::sqrt(0.9 * 0.1 / 100000)));
}

TEST_CASE("averaging risk over the prior matches joint simulation", "[mc]") {
    // E_pi[R_theta] computed two ways must agree within Monte Carlo error
    fab::NormalFabConfig cfg(1.0, 1.0, 0.0, 1.0, 0.1);

    fab::RngStream theta_stream = fab::RngStream::seeded(914);
    double outer = 0.0;
    const int n_theta = 10;
    const long reps_inner = 100;
    double outer_var_acc = 0.0;
    for (int t = 0; t < n_theta; ++t) {
        const double theta = theta_stream.normal();  // lambda = 1 prior
        const fab::SimReport r =
            fab::estimate_risk_normal_1d(cfg, theta, reps_inner, 915 + t, 128);
        outer += r.estimate;
        outer_var_acc += r.std_error * r.std_error;
    }
    outer /= n_theta;

    auto joint = [&cfg](fab::RngStream& rng) {
        const double theta = rng.normal();
        const double x = theta + rng.normal();
        return fab::fab_interval_1d(x, cfg, 128).total_measure;
    };
    const fab::SimReport j =
        fab::run_replicates(joint, 1000, 916, fab::Quantity::expected_measure, "joint");

    // dominant error: dispersion of theta draws between the two routes
    const double slack =
        3.0 * std::sqrt(outer_var_acc / (n_theta * n_theta) + j.std_error * j.std_error) + 0.15;
    CHECK(outer == Approx(j.estimate).margin(slack));
}

TEST_CASE("figure tables have the advertised shape", "[mc]") {
    fab::FigureOptions opt;
    opt.fig1_resolution = 512;
    const fab::FigureTable f1 = fab::figure_data(fab::Figure::fig1, opt, 1);
    REQUIRE(f1.columns == std::vector<std::string>{"lambda", "x", "width"});
    CHECK(f1.rows.size() == 5 * 13);

    // pivotal row: constant width 4.65235
    double lam_small_width0 = 0.0;
    for (const auto& row : f1.rows) {
        if (std::isinf(row[0])) CHECK(row[2] == Approx(4.65235).margin(1e-3));
        if (row[0] == 0.1 && row[1] == 0.0) lam_small_width0 = row[2];
    }
    // the most informative prior gives the narrowest interval at x = 0
    for (const auto& row : f1.rows) {
        if (row[1] == 0.0) CHECK(lam_small_width0 <= row[2] + 1e-12);
    }
}

TEST_CASE("figure2 table reports areas with bounds", "[mc]") {
    fab::FigureOptions opt;
    opt.fig2_grid = 48;
    const fab::FigureTable f2 = fab::figure_data(fab::Figure::fig2, opt, 1);
    REQUIRE(f2.columns ==
            std::vector<std::string>{"lambda", "x_norm", "area", "err_bound"});
    CHECK(f2.rows.size() == 5 * 9);
    for (const auto& row : f2.rows) {
        CHECK(row[2] > 0.0);
        CHECK(row[3] > 0.0);
    }
}
