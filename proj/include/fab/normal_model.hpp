#pragma once

// Prediction regions for the p-variate normal model: X ~ N_p(theta, k*Sigma)
// and Y ~ N_p(theta, Sigma) independent, with prior theta ~ N_p(mu,
// lambda*Sigma). Membership compares a shifted standardized contrast against
// a noncentral chi-square quantile whose noncentrality moves with the
// sufficient statistic; lambda = +infinity gives the pivotal region exactly.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fab/region.hpp"
#include "fab/rng.hpp"
#include "fab/specfun.hpp"

namespace fab {

struct NormalFabConfig {
    int p;
    double k;                // variance ratio of X
    Eigen::MatrixXd Sigma;   // p x p, symmetric positive definite
    Eigen::VectorXd mu;      // prior mean
    double lambda;           // prior variance multiplier; +inf for the pivotal limit
    double alpha;            // miscoverage in (0,1)
    Eigen::MatrixXd chol_L;  // lower Cholesky factor, Sigma = L L^T

    NormalFabConfig(double k_, double sigma2, double mu_, double lambda_, double alpha_)
        : NormalFabConfig(k_, Eigen::MatrixXd::Constant(1, 1, sigma2),
                          Eigen::VectorXd::Constant(1, mu_), lambda_, alpha_) {}

    NormalFabConfig(double k_, Eigen::MatrixXd Sigma_, Eigen::VectorXd mu_, double lambda_,
                    double alpha_)
        : p(static_cast<int>(Sigma_.rows())),
          k(k_),
          Sigma(std::move(Sigma_)),
          mu(std::move(mu_)),
          lambda(lambda_),
          alpha(alpha_) {
        if (p < 1 || Sigma.cols() != p) {
            throw std::invalid_argument("NormalFabConfig: Sigma must be square, p >= 1");
        }
        if (mu.size() != p) {
            throw std::invalid_argument("NormalFabConfig: mu has wrong length");
        }
        if (!(k > 0.0) || !std::isfinite(k)) {
            throw std::invalid_argument("NormalFabConfig: k must be positive");
        }
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw std::invalid_argument("NormalFabConfig: alpha must be in (0,1)");
        }
        if (!(lambda > 0.0)) {
            throw std::invalid_argument("NormalFabConfig: lambda must be positive or +inf");
        }
        if (!Sigma.isApprox(Sigma.transpose(), 1e-12)) {
            throw std::invalid_argument("NormalFabConfig: Sigma must be symmetric");
        }
        Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
        const Eigen::VectorXd pivots = llt.matrixLLT().diagonal();
        if (llt.info() != Eigen::Success ||
            pivots.minCoeff() < 1e-7 * pivots.maxCoeff()) {
            throw std::invalid_argument("NormalFabConfig: Sigma is not positive definite");
        }
        chol_L = llt.matrixL();
    }

    bool lambda_infinite() const { return std::isinf(lambda); }

    double v() const { return k * k / (k + 1.0); }

    // Prior predictive variance factor of X: Var(X) = (k + lambda) Sigma.
    double v_lambda_x() const { return k + lambda; }

    // Posterior predictive variance factor of Y given X: Var = v_lambda_y * Sigma.
    double v_lambda_y() const {
        if (lambda_infinite()) return k + 1.0;
        return (lambda * (k + 1.0) + k) / (k + lambda);
    }

    // Sigma^{-1/2} w, with Sigma^{-1/2} the inverse of the lower Cholesky factor.
    Eigen::VectorXd whiten(const Eigen::VectorXd& w) const {
        return chol_L.triangularView<Eigen::Lower>().solve(w);
    }
};

inline Eigen::VectorXd sufficient_z(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                    double k) {
    return (x + k * y) / (1.0 + k);
}

// delta_z = Sigma^{-1/2} (mu - z) sqrt(v) / (v_lambda_x - v). The divisor
// k + lambda - k^2/(k+1) is positive for every k, lambda > 0.
inline Eigen::VectorXd delta_z(const Eigen::VectorXd& z, const NormalFabConfig& cfg) {
    if (z.size() != cfg.p) throw std::invalid_argument("delta_z: dimension mismatch");
    if (cfg.lambda_infinite()) return Eigen::VectorXd::Zero(cfg.p);
    const double scale = std::sqrt(cfg.v()) / (cfg.v_lambda_x() - cfg.v());
    return cfg.whiten(cfg.mu - z) * scale;
}

// Membership of y in the region at x:
// || Sigma^{-1/2}(x - y)/sqrt(k+1) + delta_z ||^2 < chi^2_{p, ||delta_z||^2, 1-alpha}.
inline bool fab_member(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       const NormalFabConfig& cfg) {
    if (x.size() != cfg.p || y.size() != cfg.p) {
        throw std::invalid_argument("fab_member: dimension mismatch");
    }
    const Eigen::VectorXd delta = delta_z(sufficient_z(x, y, cfg.k), cfg);
    const Eigen::VectorXd contrast =
        cfg.whiten(x - y) / std::sqrt(cfg.k + 1.0) + delta;
    const double stat = contrast.squaredNorm();
    const double nc = delta.squaredNorm();
    return stat < ncchisq_quantile(1.0 - cfg.alpha, NoncentralChiSq(cfg.p, nc));
}

// Same acceptance set written through the posterior-mean estimator
// theta_hat = (x/k + mu/lambda)/(1/k + 1/lambda):
// || Sigma^{-1/2}(y - theta_hat)/sqrt(v_lambda_y) ||^2 (k+1)/v_lambda_y
// compared against the same noncentral quantile. Kept as a separate route so
// the two parameterizations can be checked against each other.
inline bool fab_member_posterior_form(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                      const NormalFabConfig& cfg) {
    if (x.size() != cfg.p || y.size() != cfg.p) {
        throw std::invalid_argument("fab_member_posterior_form: dimension mismatch");
    }
    Eigen::VectorXd theta_hat;
    if (cfg.lambda_infinite()) {
        theta_hat = x;
    } else {
        theta_hat = (x / cfg.k + cfg.mu / cfg.lambda) / (1.0 / cfg.k + 1.0 / cfg.lambda);
    }
    const double vy = cfg.v_lambda_y();
    const double stat =
        cfg.whiten(y - theta_hat).squaredNorm() / vy * (cfg.k + 1.0) / vy;
    const Eigen::VectorXd delta = delta_z(sufficient_z(x, y, cfg.k), cfg);
    const double nc = delta.squaredNorm();
    return stat < ncchisq_quantile(1.0 - cfg.alpha, NoncentralChiSq(cfg.p, nc));
}

// Pivotal interval x +/- sigma*sqrt(k+1)*Phi^{-1}(1-alpha/2), the
// lambda = infinity limit in closed form.
inline Interval pivotal_interval_1d(double x, double k, double sigma, double alpha) {
    const double half = sigma * std::sqrt(k + 1.0) * norm_quantile(1.0 - alpha / 2.0);
    return {x - half, x + half};
}

inline RegionResult fab_interval_1d(double x, const NormalFabConfig& cfg,
                                    int resolution = 2048) {
    if (cfg.p != 1) throw std::invalid_argument("fab_interval_1d: requires p = 1");
    const double sigma = std::sqrt(cfg.Sigma(0, 0));
    Eigen::VectorXd xv = Eigen::VectorXd::Constant(1, x);
    auto member = [&](double y) {
        return fab_member(xv, Eigen::VectorXd::Constant(1, y), cfg);
    };
    return invert_membership(member, x, sigma * std::sqrt(cfg.k + 1.0), resolution);
}

inline RegionResult fab_region_2d(const Eigen::VectorXd& x, const NormalFabConfig& cfg,
                                  int grid_n = 512) {
    if (cfg.p != 2) throw std::invalid_argument("fab_region_2d: requires p = 2");
    if (x.size() != 2) throw std::invalid_argument("fab_region_2d: x has wrong length");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cfg.Sigma);
    const double sigma_max = std::sqrt(es.eigenvalues().maxCoeff());
    auto member = [&](double y1, double y2) {
        Eigen::VectorXd y(2);
        y << y1, y2;
        return fab_member(x, y, cfg);
    };
    const double half_width = 6.0 * sigma_max * std::sqrt(cfg.k + 1.0);
    return grid_region_2d(member, x(0), x(1), half_width, grid_n);
}

// Variant with estimated covariance. Sigma_hat (nu * Sigma_hat Wishart
// distributed, independent of theta_hat) replaces Sigma in the contrast;
// tilde_Sigma, which must be independent of (theta_hat, Sigma_hat), replaces
// it in the shift. The threshold is the 1-alpha quantile of ||T + delta||^2
// for the studentized contrast T.
struct NormalEstVarConfig {
    int p;
    double k;
    Eigen::VectorXd mu;
    double lambda;  // +inf allowed
    double alpha;
};

inline bool fab_member_estvar(const Eigen::VectorXd& theta_hat,
                              const Eigen::MatrixXd& Sigma_hat, int nu,
                              const Eigen::VectorXd& y, const Eigen::MatrixXd& tilde_Sigma,
                              const NormalEstVarConfig& cfg, long reps = 20000,
                              std::uint64_t seed = 0x7ab5eedULL) {
    const int p = cfg.p;
    if (nu < 1) throw std::domain_error("fab_member_estvar: nu must be >= 1");
    if (theta_hat.size() != p || y.size() != p || Sigma_hat.rows() != p ||
        Sigma_hat.cols() != p || tilde_Sigma.rows() != p || tilde_Sigma.cols() != p) {
        throw std::invalid_argument("fab_member_estvar: dimension mismatch");
    }
    Eigen::LLT<Eigen::MatrixXd> llt_hat(Sigma_hat);
    Eigen::LLT<Eigen::MatrixXd> llt_tilde(tilde_Sigma);
    if (llt_hat.info() != Eigen::Success || llt_tilde.info() != Eigen::Success) {
        throw std::invalid_argument("fab_member_estvar: covariance estimate not SPD");
    }

    const Eigen::VectorXd z = sufficient_z(theta_hat, y, cfg.k);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(p);
    if (!std::isinf(cfg.lambda)) {
        const double v = cfg.k * cfg.k / (cfg.k + 1.0);
        const double scale = std::sqrt(v) / (cfg.k + cfg.lambda - v);
        delta = Eigen::MatrixXd(llt_tilde.matrixL())
                    .triangularView<Eigen::Lower>()
                    .solve(Eigen::VectorXd(cfg.mu - z)) *
                scale;
    }

    // Sigma_hat^{-1/2} = lower Cholesky factor of Sigma_hat^{-1}
    const Eigen::MatrixXd prec =
        llt_hat.solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::LLT<Eigen::MatrixXd> llt_prec(prec);
    if (llt_prec.info() != Eigen::Success) {
        throw std::invalid_argument("fab_member_estvar: precision Cholesky failed");
    }
    const Eigen::MatrixXd root = llt_prec.matrixL();
    const Eigen::VectorXd contrast =
        root * (theta_hat - y) / std::sqrt(cfg.k + 1.0) + delta;
    const double stat = contrast.squaredNorm();

    std::vector<double> b(delta.data(), delta.data() + p);
    const double threshold = shifted_t_sq_quantile(b, 1.0 - cfg.alpha, nu, reps, seed);
    return stat < threshold;
}

}  // namespace fab
