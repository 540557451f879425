#pragma once

// Tidy tables behind the four summary figures: interval widths and region
// areas against the observation, expected volumes against the parameter, and
// average regression risks against the prior scale. Defaults are sized for a
// desk run; every knob is overridable.

#include <Eigen/Dense>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fab/experiments.hpp"
#include "fab/mc.hpp"
#include "fab/normal_model.hpp"
#include "fab/regression.hpp"

namespace fab {

struct FigureTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

enum class Figure { fig1, fig2, fig3, fig4 };

struct FigureOptions {
    // fig1: interval widths, exact inversion
    int fig1_resolution = 2048;
    // fig2: areas by cell counting
    int fig2_grid = 128;
    // fig3: Monte Carlo expected volumes
    long fig3_reps_1d = 200;
    long fig3_reps_2d = 40;
    int fig3_resolution_1d = 256;
    int fig3_grid_2d = 40;
    // fig4: regression Bayes risk sweep
    long fig4_reps = 200;
    int fig4_vrows = 25;
    bool fig4_full_vrows = false;  // sweep all design rows instead of a sample
    int fig4_resolution = 128;
};

// Design matrix with correlated, standardized columns: a five-factor model
// plus noise, each column then centered and scaled to unit sample variance.
inline Eigen::MatrixXd correlated_design(int n, int p, std::uint64_t seed) {
    constexpr int kFactors = 5;
    RngStream rng = RngStream::substream(seed, 0xde516eULL);
    Eigen::MatrixXd factors(n, kFactors);
    Eigen::MatrixXd loadings(p, kFactors);
    Eigen::MatrixXd noise(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < kFactors; ++j) factors(i, j) = rng.normal();
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < kFactors; ++j) loadings(i, j) = rng.normal();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) noise(i, j) = rng.normal();
    Eigen::MatrixXd u = factors * loadings.transpose() + noise;
    for (int j = 0; j < p; ++j) {
        const double mean = u.col(j).mean();
        u.col(j).array() -= mean;
        const double sd = std::sqrt(u.col(j).squaredNorm() / (n - 1));
        u.col(j) /= sd;
    }
    return u;
}

namespace detail {

inline const std::vector<double>& figure_lambdas() {
    static const std::vector<double> ls = {0.1, 1.0, 10.0, 100.0,
                                           std::numeric_limits<double>::infinity()};
    return ls;
}

inline FigureTable figure1(const FigureOptions& opt) {
    FigureTable t;
    t.columns = {"lambda", "x", "width"};
    for (double lambda : figure_lambdas()) {
        NormalFabConfig cfg(1.0, 1.0, 0.0, lambda, 0.1);
        for (int i = 0; i <= 12; ++i) {
            const double x = 0.5 * i;
            const double width = fab_interval_1d(x, cfg, opt.fig1_resolution).total_measure;
            t.rows.push_back({lambda, x, width});
        }
    }
    return t;
}

inline FigureTable figure2(const FigureOptions& opt) {
    FigureTable t;
    t.columns = {"lambda", "x_norm", "area", "err_bound"};
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
    for (double lambda : figure_lambdas()) {
        NormalFabConfig cfg(1.0, eye, mu, lambda, 0.1);
        for (int i = 0; i <= 8; ++i) {
            const double r = 0.75 * i;
            Eigen::VectorXd x(2);
            x << r, 0.0;
            const RegionResult reg = fab_region_2d(x, cfg, opt.fig2_grid);
            t.rows.push_back({lambda, r, reg.total_measure, reg.err_bound});
        }
    }
    return t;
}

inline FigureTable figure3(const FigureOptions& opt, std::uint64_t seed) {
    FigureTable t;
    t.columns = {"p", "lambda", "theta", "risk", "std_error"};
    std::uint64_t cell = 0;
    for (int p : {1, 2}) {
        for (double lambda : {0.1, 1.0, 10.0, std::numeric_limits<double>::infinity()}) {
            for (int i = 0; i <= 6; ++i) {
                const double theta = static_cast<double>(i);
                SimReport rep;
                if (p == 1) {
                    NormalFabConfig cfg(1.0, 1.0, 0.0, lambda, 0.1);
                    rep = estimate_risk_normal_1d(cfg, theta, opt.fig3_reps_1d, seed + cell,
                                                  opt.fig3_resolution_1d);
                } else {
                    NormalFabConfig cfg(1.0, Eigen::MatrixXd::Identity(2, 2),
                                        Eigen::VectorXd::Zero(2), lambda, 0.1);
                    rep = estimate_risk_normal_2d(cfg, Eigen::VectorXd::Constant(2, theta),
                                                  opt.fig3_reps_2d, seed + cell,
                                                  opt.fig3_grid_2d);
                }
                t.rows.push_back({double(p), lambda, theta, rep.estimate, rep.std_error});
                ++cell;
            }
        }
    }
    return t;
}

}  // namespace detail

// Average risks of the regression interval and its equivariant baseline over
// prior draws beta ~ N(0, tau2 I), with intervals built from prior scale
// tau_pi2 and split variance estimates. All three curves share each
// replicate's draws, so the curve differences are paired.
struct Fig4Cell {
    double tau2;
    double equivariant;
    double fab_matched;       // tau_pi^2 = tau^2
    double fab_concentrated;  // tau_pi^2 = tau^2 / 4
    double se_matched;        // standard error of the paired gap to equivariant
    double se_concentrated;
};

inline std::vector<Fig4Cell> figure4_cells(const FigureOptions& opt, std::uint64_t seed) {
    const int n = 100, p = 75;
    const Eigen::MatrixXd u = correlated_design(n, p, seed);
    const int split_df = default_split_df(n, p);

    std::vector<int> vrows;
    if (opt.fig4_full_vrows) {
        for (int i = 0; i < n; ++i) vrows.push_back(i);
    } else {
        RngStream pick = RngStream::substream(seed, 0xf19f4ULL);
        std::vector<int> all(n);
        for (int i = 0; i < n; ++i) all[i] = i;
        for (int i = 0; i < opt.fig4_vrows; ++i) {
            const int j = i + static_cast<int>(pick.next_u64() % (n - i));
            std::swap(all[i], all[j]);
            vrows.push_back(all[i]);
        }
    }

    const std::vector<double> tau2_grid = {0.1, 0.5, 1.0, 2.5, 5.0, 10.0};
    std::vector<Fig4Cell> cells;
    for (std::size_t tcell = 0; tcell < tau2_grid.size(); ++tcell) {
        const double tau2 = tau2_grid[tcell];
        const long total = static_cast<long>(vrows.size()) * opt.fig4_reps;
        std::vector<std::array<double, 3>> widths(static_cast<std::size_t>(total));

        std::atomic<long> cursor{0};
        auto worker = [&]() {
            for (;;) {
                const long idx = cursor.fetch_add(1);
                if (idx >= total) break;
                const long vi = idx / opt.fig4_reps;
                const long r = idx % opt.fig4_reps;
                const Eigen::VectorXd v = u.row(vrows[static_cast<std::size_t>(vi)]).transpose();
                const RegressionFabConfig cfg_matched(
                    u, v, 1.0, RegressionFabConfig::psi_from_tau2(p, tau2), 0.1);
                const RegressionFabConfig cfg_conc(
                    u, v, 1.0, RegressionFabConfig::psi_from_tau2(p, tau2 / 4.0), 0.1);
                RngStream rng = RngStream::substream(
                    seed + 1000 * (tcell + 1) + static_cast<std::uint64_t>(vi),
                    static_cast<std::uint64_t>(r));
                Eigen::VectorXd beta(p);
                for (int i = 0; i < p; ++i) beta(i) = std::sqrt(tau2) * rng.normal();
                Eigen::VectorXd x = u * beta;
                for (int i = 0; i < n; ++i) x(i) += rng.normal();
                const SplitVariance sv = split_variance_estimates(x, u, split_df);
                const Interval eq =
                    equivariant_interval_reg_t(x, cfg_matched, sv.sigma_hat2, sv.nu);
                const double w_fab = fab_interval_reg_t(x, cfg_matched, sv.sigma_hat2, sv.nu,
                                                        sv.sigma_tilde2, opt.fig4_resolution)
                                         .total_measure;
                const double w_mis = fab_interval_reg_t(x, cfg_conc, sv.sigma_hat2, sv.nu,
                                                        sv.sigma_tilde2, opt.fig4_resolution)
                                         .total_measure;
                widths[static_cast<std::size_t>(idx)] = {eq.length(), w_fab, w_mis};
            }
        };
        const int n_threads = std::min<long>(mc_threads(), total);
        if (n_threads <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
            for (std::thread& th : pool) th.join();
        }

        double sum_eq = 0.0, sum_fab = 0.0, sum_mis = 0.0;
        for (const auto& w : widths) {
            sum_eq += w[0];
            sum_fab += w[1];
            sum_mis += w[2];
        }
        const double mean_gap_fab = (sum_fab - sum_eq) / total;
        const double mean_gap_mis = (sum_mis - sum_eq) / total;
        double var_fab = 0.0, var_mis = 0.0;
        for (const auto& w : widths) {
            var_fab += ((w[1] - w[0]) - mean_gap_fab) * ((w[1] - w[0]) - mean_gap_fab);
            var_mis += ((w[2] - w[0]) - mean_gap_mis) * ((w[2] - w[0]) - mean_gap_mis);
        }
        var_fab /= std::max(1L, total - 1);
        var_mis /= std::max(1L, total - 1);

        Fig4Cell cell;
        cell.tau2 = tau2;
        cell.equivariant = sum_eq / total;
        cell.fab_matched = sum_fab / total;
        cell.fab_concentrated = sum_mis / total;
        cell.se_matched = std::sqrt(var_fab / total);
        cell.se_concentrated = std::sqrt(var_mis / total);
        cells.push_back(cell);
    }
    return cells;
}

inline FigureTable figure_data(Figure which, const FigureOptions& opt, std::uint64_t seed) {
    switch (which) {
        case Figure::fig1:
            return detail::figure1(opt);
        case Figure::fig2:
            return detail::figure2(opt);
        case Figure::fig3:
            return detail::figure3(opt, seed);
        case Figure::fig4: {
            FigureTable t;
            t.columns = {"tau2", "tau_pi2", "avg_risk", "std_error"};
            for (const Fig4Cell& c : figure4_cells(opt, seed)) {
                t.rows.push_back(
                    {c.tau2, std::numeric_limits<double>::infinity(), c.equivariant, 0.0});
                t.rows.push_back({c.tau2, c.tau2, c.fab_matched, c.se_matched});
                t.rows.push_back({c.tau2, c.tau2 / 4.0, c.fab_concentrated, c.se_concentrated});
            }
            return t;
        }
    }
    throw std::invalid_argument("figure_data: unknown figure");
}

}  // namespace fab
