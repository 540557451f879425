#pragma once

// Prediction intervals for Y ~ N(v^T beta, sigma^2) from X ~ N_n(U beta,
// sigma^2 I) under the prior beta ~ N_p(0, sigma^2 Psi^{-1}): exact intervals
// for known sigma^2, a t-version with split variance estimates, and the
// equivariant and posterior-predictive baselines.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include "fab/critical.hpp"
#include "fab/region.hpp"
#include "fab/specfun.hpp"

namespace fab {

struct RegressionFabConfig {
    Eigen::MatrixXd U;              // n x p design, full column rank
    Eigen::VectorXd v;              // target covariate vector
    std::optional<double> sigma2;   // known variance; nullopt when estimated
    Eigen::MatrixXd Psi;            // prior precision, symmetric PSD
    double alpha;
    // cached quadratic forms
    Eigen::MatrixXd S0;             // (U^T U)^{-1}
    Eigen::MatrixXd S_psi;          // (U^T U + Psi)^{-1}
    double w0;                      // 1 + v^T S0 v
    double w_psi;                   // 1 + v^T S_psi v

    RegressionFabConfig(Eigen::MatrixXd U_, Eigen::VectorXd v_, std::optional<double> sigma2_,
                        Eigen::MatrixXd Psi_, double alpha_)
        : U(std::move(U_)), v(std::move(v_)), sigma2(sigma2_), Psi(std::move(Psi_)),
          alpha(alpha_) {
        const int p = static_cast<int>(U.cols());
        if (U.rows() < 1 || p < 1) throw std::invalid_argument("RegressionFabConfig: empty design");
        if (v.size() != p) throw std::invalid_argument("RegressionFabConfig: v has wrong length");
        if (Psi.rows() != p || Psi.cols() != p) {
            throw std::invalid_argument("RegressionFabConfig: Psi has wrong shape");
        }
        if (!Psi.isApprox(Psi.transpose(), 1e-10)) {
            throw std::invalid_argument("RegressionFabConfig: Psi must be symmetric");
        }
        if (sigma2 && !(*sigma2 > 0.0)) {
            throw std::invalid_argument("RegressionFabConfig: sigma2 must be positive");
        }
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw std::invalid_argument("RegressionFabConfig: alpha must be in (0,1)");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Psi);
        if (es.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, es.eigenvalues().maxCoeff())) {
            throw std::invalid_argument("RegressionFabConfig: Psi must be positive semidefinite");
        }
        const Eigen::MatrixXd gram = U.transpose() * U;
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        const Eigen::VectorXd pivots = llt.matrixLLT().diagonal();
        if (llt.info() != Eigen::Success ||
            pivots.minCoeff() < 1e-7 * pivots.maxCoeff()) {
            throw std::invalid_argument("RegressionFabConfig: U^T U is singular");
        }
        S0 = llt.solve(Eigen::MatrixXd::Identity(p, p));
        Eigen::LLT<Eigen::MatrixXd> llt_psi(gram + Psi);
        if (llt_psi.info() != Eigen::Success) {
            throw std::invalid_argument("RegressionFabConfig: U^T U + Psi is singular");
        }
        S_psi = llt_psi.solve(Eigen::MatrixXd::Identity(p, p));
        w0 = 1.0 + v.dot(S0 * v);
        w_psi = 1.0 + v.dot(S_psi * v);
    }

    int n() const { return static_cast<int>(U.rows()); }
    int pdim() const { return static_cast<int>(U.cols()); }
    double sigma() const {
        if (!sigma2) throw std::logic_error("RegressionFabConfig: sigma2 is not known");
        return std::sqrt(*sigma2);
    }

    // Prior precision from the isotropic prior beta ~ N(0, sigma^2 tau2 I).
    static Eigen::MatrixXd psi_from_tau2(int p, double tau2) {
        if (!(tau2 > 0.0)) throw std::invalid_argument("psi_from_tau2: tau2 must be positive");
        return Eigen::MatrixXd::Identity(p, p) / tau2;
    }
};

inline Eigen::VectorXd reg_sufficient(const Eigen::VectorXd& x, double y,
                                      const RegressionFabConfig& cfg) {
    return cfg.U.transpose() * x + cfg.v * y;
}

inline Eigen::VectorXd ols_estimate(const Eigen::VectorXd& x, const RegressionFabConfig& cfg) {
    return cfg.S0 * (cfg.U.transpose() * x);
}

inline Eigen::VectorXd ridge_estimate(const Eigen::VectorXd& x, const RegressionFabConfig& cfg) {
    return cfg.S_psi * (cfg.U.transpose() * x);
}

// delta_z = v^T (S0/w0 - S_psi/w_psi) z * sqrt(w0) / sigma. Zero when Psi = 0
// and linear in z.
inline double delta_reg(const Eigen::VectorXd& z, const RegressionFabConfig& cfg) {
    const double lin = cfg.v.dot(cfg.S0 * z) / cfg.w0 - cfg.v.dot(cfg.S_psi * z) / cfg.w_psi;
    return lin * std::sqrt(cfg.w0) / cfg.sigma();
}

// Same shift with the independent scale estimate sigma_tilde in place of sigma.
inline double delta_reg_t(const Eigen::VectorXd& z, const RegressionFabConfig& cfg,
                          double sigma_tilde) {
    if (!(sigma_tilde > 0.0)) throw std::invalid_argument("delta_reg_t: sigma_tilde must be positive");
    const double lin = cfg.v.dot(cfg.S0 * z) / cfg.w0 - cfg.v.dot(cfg.S_psi * z) / cfg.w_psi;
    return lin * std::sqrt(cfg.w0) / sigma_tilde;
}

// Known-sigma membership: |(y - bhat^T v)/(sigma sqrt(w0)) + delta_z| <= q_z
// with q_z solving Phi(q - delta_z) - Phi(-q - delta_z) = 1 - alpha.
inline bool fab_member_reg(const Eigen::VectorXd& x, double y, const RegressionFabConfig& cfg) {
    const Eigen::VectorXd z = reg_sufficient(x, y, cfg);
    const double delta = delta_reg(z, cfg);
    const double bhat_v = cfg.v.dot(ols_estimate(x, cfg));
    const double stat = (y - bhat_v) / (cfg.sigma() * std::sqrt(cfg.w0)) + delta;
    const double q = solve_critical_q(delta, cfg.alpha, CriticalCdf::normal());
    return std::fabs(stat) <= q;
}

inline RegionResult fab_interval_reg(const Eigen::VectorXd& x, const RegressionFabConfig& cfg,
                                     int resolution = 2048) {
    const double center = cfg.v.dot(ols_estimate(x, cfg));
    auto member = [&](double y) { return fab_member_reg(x, y, cfg); };
    return invert_membership(member, center, cfg.sigma() * std::sqrt(cfg.w0), resolution);
}

// Equivariant interval from the pivot (y - bhat^T v)/(sigma sqrt(w0)).
inline Interval equivariant_interval_reg(const Eigen::VectorXd& x,
                                         const RegressionFabConfig& cfg) {
    const double center = cfg.v.dot(ols_estimate(x, cfg));
    const double half = cfg.sigma() * std::sqrt(cfg.w0) * norm_quantile(1.0 - cfg.alpha / 2.0);
    return {center - half, center + half};
}

// Posterior predictive interval bhat_psi^T v +/- Phi^{-1}(1-alpha/2) sigma
// sqrt(w_psi). Baseline only: its frequentist coverage varies with beta.
inline std::pair<double, double> bayes_interval_reg(const Eigen::VectorXd& x,
                                                    const RegressionFabConfig& cfg) {
    const double center = cfg.v.dot(ridge_estimate(x, cfg));
    const double half = norm_quantile(1.0 - cfg.alpha / 2.0) * cfg.sigma() * std::sqrt(cfg.w_psi);
    return {center - half, center + half};
}

// Two independent scale estimates from the residual sum of squares: the
// residual is rotated into an orthonormal basis of the orthogonal complement
// of col(U); the first split_df squared coordinates give sigma_tilde2 and the
// remaining nu = n - p - split_df give sigma_hat2. Both are independent of
// U^T X.
struct SplitVariance {
    double sigma_hat2;   // drives the interval width; nu degrees of freedom
    int nu;
    double sigma_tilde2; // drives the shift; tilde_df degrees of freedom
    int tilde_df;
};

inline int default_split_df(int n, int p) {
    return std::min(4, (n - p) / 2);
}

inline SplitVariance split_variance_estimates(const Eigen::VectorXd& x,
                                              const Eigen::MatrixXd& U, int split_df) {
    const int n = static_cast<int>(U.rows());
    const int p = static_cast<int>(U.cols());
    if (x.size() != n) throw std::invalid_argument("split_variance_estimates: x has wrong length");
    if (n - p < 2) throw std::invalid_argument("split_variance_estimates: need n - p >= 2");
    if (split_df < 1 || split_df > n - p - 1) {
        throw std::invalid_argument("split_variance_estimates: split_df must be in [1, n-p-1]");
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(U);
    const Eigen::MatrixXd q_full = qr.householderQ();
    const Eigen::VectorXd coords = q_full.rightCols(n - p).transpose() * x;
    double tilde_ss = 0.0, hat_ss = 0.0;
    for (int i = 0; i < n - p; ++i) {
        const double c2 = coords(i) * coords(i);
        if (i < split_df) {
            tilde_ss += c2;
        } else {
            hat_ss += c2;
        }
    }
    const int nu = n - p - split_df;
    return {hat_ss / nu, nu, tilde_ss / split_df, split_df};
}

// t-version membership: |(y - bhat^T v)/(sigma_hat sqrt(w0)) + delta_t| <= q_z
// with q_z solving F_nu(q - delta_t) - F_nu(-q - delta_t) = 1 - alpha.
// sigma_hat2 and sigma_tilde2 must be independent of each other and of U^T X
// (split_variance_estimates provides such a pair).
inline bool fab_member_reg_t(const Eigen::VectorXd& x, double y, const RegressionFabConfig& cfg,
                             double sigma_hat2, int nu, double sigma_tilde2) {
    if (!(sigma_hat2 > 0.0) || !(sigma_tilde2 > 0.0)) {
        throw std::invalid_argument("fab_member_reg_t: variance estimates must be positive");
    }
    const Eigen::VectorXd z = reg_sufficient(x, y, cfg);
    const double delta = delta_reg_t(z, cfg, std::sqrt(sigma_tilde2));
    const double bhat_v = cfg.v.dot(ols_estimate(x, cfg));
    const double stat = (y - bhat_v) / (std::sqrt(sigma_hat2) * std::sqrt(cfg.w0)) + delta;
    const double q = solve_critical_q(delta, cfg.alpha, CriticalCdf::student_t(nu));
    return std::fabs(stat) <= q;
}

inline RegionResult fab_interval_reg_t(const Eigen::VectorXd& x, const RegressionFabConfig& cfg,
                                       double sigma_hat2, int nu, double sigma_tilde2,
                                       int resolution = 2048) {
    const double center = cfg.v.dot(ols_estimate(x, cfg));
    auto member = [&](double y) {
        return fab_member_reg_t(x, y, cfg, sigma_hat2, nu, sigma_tilde2);
    };
    return invert_membership(member, center, std::sqrt(sigma_hat2) * std::sqrt(cfg.w0),
                             resolution);
}

inline Interval equivariant_interval_reg_t(const Eigen::VectorXd& x,
                                           const RegressionFabConfig& cfg, double sigma_hat2,
                                           int nu) {
    const double center = cfg.v.dot(ols_estimate(x, cfg));
    const double half = std::sqrt(sigma_hat2) * std::sqrt(cfg.w0) *
                        two_sided_quantile(cfg.alpha, CriticalCdf::student_t(nu));
    return {center - half, center + half};
}

}  // namespace fab
