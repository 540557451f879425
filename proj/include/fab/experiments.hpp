#pragma once

// Coverage and expected-measure estimators for each region procedure: a model
// sampler plus the membership predicate, run through the replicate engine.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "fab/conformal.hpp"
#include "fab/mc.hpp"
#include "fab/normal_model.hpp"
#include "fab/regression.hpp"

namespace fab {

namespace detail {

inline Eigen::VectorXd draw_normal_vec(RngStream& rng, int p) {
    Eigen::VectorXd z(p);
    for (int i = 0; i < p; ++i) z(i) = rng.normal();
    return z;
}

inline std::string digest(std::initializer_list<std::pair<const char*, double>> kv,
                          const std::string& head) {
    std::ostringstream os;
    os << head;
    for (const auto& [key, val] : kv) os << ' ' << key << '=' << val;
    return os.str();
}

}  // namespace detail

// --- normal model ---------------------------------------------------------

inline SimReport estimate_coverage_normal(const NormalFabConfig& cfg,
                                          const Eigen::VectorXd& theta, long n_reps,
                                          std::uint64_t seed) {
    auto replicate = [&cfg, theta](RngStream& rng) -> double {
        const Eigen::VectorXd x =
            theta + std::sqrt(cfg.k) * (cfg.chol_L * detail::draw_normal_vec(rng, cfg.p));
        const Eigen::VectorXd y = theta + cfg.chol_L * detail::draw_normal_vec(rng, cfg.p);
        return fab_member(x, y, cfg) ? 1.0 : 0.0;
    };
    return run_replicates(replicate, n_reps, seed, Quantity::coverage,
                          detail::digest({{"p", double(cfg.p)}, {"k", cfg.k},
                                          {"lambda", cfg.lambda}, {"alpha", cfg.alpha},
                                          {"theta0", theta(0)}},
                                         "coverage:normal"));
}

inline SimReport estimate_coverage_pivotal_1d(double k, double sigma, double alpha,
                                              double theta, long n_reps, std::uint64_t seed) {
    const double half = sigma * std::sqrt(k + 1.0) * norm_quantile(1.0 - alpha / 2.0);
    auto replicate = [=](RngStream& rng) -> double {
        const double x = theta + std::sqrt(k) * sigma * rng.normal();
        const double y = theta + sigma * rng.normal();
        return std::fabs(x - y) < half ? 1.0 : 0.0;
    };
    return run_replicates(replicate, n_reps, seed, Quantity::coverage,
                          detail::digest({{"k", k}, {"sigma", sigma}, {"alpha", alpha},
                                          {"theta", theta}},
                                         "coverage:pivotal1d"));
}

inline SimReport estimate_risk_normal_1d(const NormalFabConfig& cfg, double theta, long n_reps,
                                         std::uint64_t seed, int resolution = 512) {
    auto replicate = [&cfg, theta, resolution](RngStream& rng) -> double {
        const double sigma = std::sqrt(cfg.Sigma(0, 0));
        const double x = theta + std::sqrt(cfg.k) * sigma * rng.normal();
        return fab_interval_1d(x, cfg, resolution).total_measure;
    };
    return run_replicates(replicate, n_reps, seed, Quantity::expected_measure,
                          detail::digest({{"k", cfg.k}, {"lambda", cfg.lambda},
                                          {"alpha", cfg.alpha}, {"theta", theta}},
                                         "risk:normal1d"));
}

inline SimReport estimate_risk_normal_2d(const NormalFabConfig& cfg,
                                         const Eigen::VectorXd& theta, long n_reps,
                                         std::uint64_t seed, int grid_n = 64) {
    auto replicate = [&cfg, theta, grid_n](RngStream& rng) -> double {
        const Eigen::VectorXd x =
            theta + std::sqrt(cfg.k) * (cfg.chol_L * detail::draw_normal_vec(rng, cfg.p));
        return fab_region_2d(x, cfg, grid_n).total_measure;
    };
    return run_replicates(replicate, n_reps, seed, Quantity::expected_measure,
                          detail::digest({{"k", cfg.k}, {"lambda", cfg.lambda},
                                          {"alpha", cfg.alpha}, {"theta0", theta(0)}},
                                         "risk:normal2d"));
}

inline SimReport estimate_coverage_estvar_1d(const NormalEstVarConfig& cfg, double theta,
                                             double sigma2, int nu, int tilde_df, long n_reps,
                                             std::uint64_t seed) {
    auto replicate = [=](RngStream& rng) -> double {
        const double sigma = std::sqrt(sigma2);
        const double x = theta + std::sqrt(cfg.k) * sigma * rng.normal();
        const double y = theta + sigma * rng.normal();
        const double sigma_hat2 = sigma2 * rng.chisq(nu) / nu;
        const double sigma_tilde2 = sigma2 * rng.chisq(tilde_df) / tilde_df;
        return fab_member_estvar(Eigen::VectorXd::Constant(1, x),
                                 Eigen::MatrixXd::Constant(1, 1, sigma_hat2), nu,
                                 Eigen::VectorXd::Constant(1, y),
                                 Eigen::MatrixXd::Constant(1, 1, sigma_tilde2), cfg)
                   ? 1.0
                   : 0.0;
    };
    return run_replicates(replicate, n_reps, seed, Quantity::coverage,
                          detail::digest({{"k", cfg.k}, {"lambda", cfg.lambda},
                                          {"alpha", cfg.alpha}, {"theta", theta},
                                          {"nu", double(nu)}},
                                         "coverage:normal-estvar"));
}

// --- regression model ------------------------------------------------------

inline SimReport estimate_coverage_regression(const RegressionFabConfig& cfg,
                                              const Eigen::VectorXd& beta, long n_reps,
                                              std::uint64_t seed) {
    auto replicate = [&cfg, beta](RngStream& rng) -> double {
        const double sig = cfg.sigma();
        const Eigen::VectorXd x =
            cfg.U * beta + sig * detail::draw_normal_vec(rng, cfg.n());
        const double y = cfg.v.dot(beta) + sig * rng.normal();
        return fab_member_reg(x, y, cfg) ? 1.0 : 0.0;
    };
    return run_replicates(replicate, n_reps, seed, Quantity::coverage,
                          detail::digest({{"n", double(cfg.n())}, {"p", double(cfg.pdim())},
                                          {"alpha", cfg.alpha}, {"beta_norm", beta.norm()}},
                                         "coverage:regression"));
}

inline SimReport estimate_coverage_regression_t(const RegressionFabConfig& cfg,
                                                const Eigen::VectorXd& beta, double sigma2,
                                                int split_df, long n_reps,
                                                std::uint64_t seed) {
    auto replicate = [&cfg, beta, sigma2, split_df](RngStream& rng) -> double {
        const double sig = std::sqrt(sigma2);
        const Eigen::VectorXd x =
            cfg.U * beta + sig * detail::draw_normal_vec(rng, cfg.n());
        const double y = cfg.v.dot(beta) + sig * rng.normal();
        const SplitVariance sv = split_variance_estimates(x, cfg.U, split_df);
        return fab_member_reg_t(x, y, cfg, sv.sigma_hat2, sv.nu, sv.sigma_tilde2) ? 1.0 : 0.0;
    };
    return run_replicates(replicate, n_reps, seed, Quantity::coverage,
                          detail::digest({{"n", double(cfg.n())}, {"p", double(cfg.pdim())},
                                          {"alpha", cfg.alpha}, {"beta_norm", beta.norm()},
                                          {"split_df", double(split_df)}},
                                         "coverage:regression-t"));
}

inline SimReport estimate_coverage_bayes_regression(const RegressionFabConfig& cfg,
                                                    const Eigen::VectorXd& beta, long n_reps,
                                                    std::uint64_t seed) {
    auto replicate = [&cfg, beta](RngStream& rng) -> double {
        const double sig = cfg.sigma();
        const Eigen::VectorXd x =
            cfg.U * beta + sig * detail::draw_normal_vec(rng, cfg.n());
        const double y = cfg.v.dot(beta) + sig * rng.normal();
        const auto [lo, hi] = bayes_interval_reg(x, cfg);
        return (y > lo && y < hi) ? 1.0 : 0.0;
    };
    return run_replicates(replicate, n_reps, seed, Quantity::coverage,
                          detail::digest({{"n", double(cfg.n())}, {"p", double(cfg.pdim())},
                                          {"alpha", cfg.alpha}, {"beta_norm", beta.norm()}},
                                         "coverage:regression-bayes"));
}

inline SimReport estimate_risk_regression(const RegressionFabConfig& cfg,
                                          const Eigen::VectorXd& beta, long n_reps,
                                          std::uint64_t seed, int resolution = 256) {
    auto replicate = [&cfg, beta, resolution](RngStream& rng) -> double {
        const double sig = cfg.sigma();
        const Eigen::VectorXd x =
            cfg.U * beta + sig * detail::draw_normal_vec(rng, cfg.n());
        return fab_interval_reg(x, cfg, resolution).total_measure;
    };
    return run_replicates(replicate, n_reps, seed, Quantity::expected_measure,
                          detail::digest({{"n", double(cfg.n())}, {"p", double(cfg.pdim())},
                                          {"alpha", cfg.alpha}, {"beta_norm", beta.norm()}},
                                         "risk:regression"));
}

// --- conformal -------------------------------------------------------------

inline SimReport estimate_coverage_conformal(const ConjugateNormalPrior& prior, int k_level,
                                             int n, double theta, ConformityScore score,
                                             long n_reps, std::uint64_t seed) {
    auto replicate = [=](RngStream& rng) -> double {
        std::vector<double> data(static_cast<std::size_t>(n));
        for (double& d : data) d = theta + rng.normal();
        const double y_next = theta + rng.normal();
        const ConformalConfig cfg(std::move(data), prior, k_level);
        return conformal_member(cfg, score, y_next) ? 1.0 : 0.0;
    };
    return run_replicates(replicate, n_reps, seed, Quantity::coverage,
                          detail::digest({{"n", double(n)}, {"k_level", double(k_level)},
                                          {"theta", theta}, {"m", prior.m},
                                          {"score", double(static_cast<int>(score))}},
                                         "coverage:conformal"));
}

}  // namespace fab
