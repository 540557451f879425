#pragma once

// Distribution-free prediction regions by rank-based inversion: a candidate
// point is kept when its conformity score is not among the k smallest of the
// n+1 leave-one-swap scores. The built-in score is the posterior predictive
// density of a conjugate normal model; any other positive function of
// (candidate, sample) can be plugged in. Ties at the rank threshold are
// included, which can only raise coverage.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "fab/region.hpp"
#include "fab/specfun.hpp"

namespace fab {

struct ConjugateNormalPrior {
    double m;       // prior mean of theta
    double lambda;  // prior variance multiplier; theta ~ N(m, lambda*sigma2); +inf = flat
    double sigma2;  // known data variance

    ConjugateNormalPrior(double m_, double lambda_, double sigma2_)
        : m(m_), lambda(lambda_), sigma2(sigma2_) {
        if (!(sigma2 > 0.0)) throw std::invalid_argument("ConjugateNormalPrior: sigma2 must be positive");
        if (!(lambda > 0.0)) throw std::invalid_argument("ConjugateNormalPrior: lambda must be positive or +inf");
    }

    // Posterior mean and variance of theta given a sample, then the
    // predictive law of a new observation: N(post_mean, sigma2 + post_var).
    void predictive(const std::vector<double>& sample, double& mean, double& var) const {
        const double n = static_cast<double>(sample.size());
        const double sum = std::accumulate(sample.begin(), sample.end(), 0.0);
        double prec = n / sigma2;
        double weighted = sum / sigma2;
        if (!std::isinf(lambda)) {
            prec += 1.0 / (lambda * sigma2);
            weighted += m / (lambda * sigma2);
        }
        mean = weighted / prec;
        var = sigma2 + 1.0 / prec;
    }
};

inline double postpred_density(double y_new, const std::vector<double>& sample,
                               const ConjugateNormalPrior& prior) {
    if (sample.empty()) throw std::invalid_argument("postpred_density: sample must be nonempty");
    double mean = 0.0, var = 0.0;
    prior.predictive(sample, mean, var);
    const double z = (y_new - mean) / std::sqrt(var);
    return norm_pdf(z) / std::sqrt(var);
}

enum class ConformityScore {
    postpred,               // posterior predictive density of the candidate
    neg_abs_dev_baseline,   // minus |candidate - sample mean|
};

using ScoreFn = std::function<double(double y_new, const std::vector<double>& sample)>;

struct ConformalConfig {
    std::vector<double> data;
    ConjugateNormalPrior prior;
    int k_level;  // alpha = k_level/(n+1); k_level = 0 accepts everything

    ConformalConfig(std::vector<double> data_, ConjugateNormalPrior prior_, int k_level_)
        : data(std::move(data_)), prior(prior_), k_level(k_level_) {
        if (data.empty()) throw std::invalid_argument("ConformalConfig: data must be nonempty");
        if (k_level < 0 || k_level > static_cast<int>(data.size())) {
            throw std::invalid_argument("ConformalConfig: k_level must be in [0, n]");
        }
    }

    static ConformalConfig from_alpha(std::vector<double> data_, ConjugateNormalPrior prior_,
                                      double alpha) {
        const int n = static_cast<int>(data_.size());
        const double k_real = alpha * (n + 1);
        const int k = static_cast<int>(std::lround(k_real));
        if (std::fabs(k_real - k) > 1e-9 || k < 0 || k > n) {
            const int k_lo = std::clamp(static_cast<int>(std::floor(k_real)), 0, n);
            const int k_hi = std::clamp(k_lo + 1, 0, n);
            throw std::invalid_argument(
                "ConformalConfig: alpha must equal k/(n+1) for integer k; nearest feasible "
                "alpha values are " +
                std::to_string(static_cast<double>(k_lo) / (n + 1)) + " and " +
                std::to_string(static_cast<double>(k_hi) / (n + 1)));
        }
        return ConformalConfig(std::move(data_), prior_, k);
    }

    int n() const { return static_cast<int>(data.size()); }
    double alpha() const { return static_cast<double>(k_level) / (n() + 1); }

    bool has_ties() const {
        std::vector<double> sorted = data;
        std::sort(sorted.begin(), sorted.end());
        return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
    }

    ScoreFn score_fn(ConformityScore score) const {
        if (score == ConformityScore::postpred) {
            const ConjugateNormalPrior pr = prior;
            return [pr](double y_new, const std::vector<double>& sample) {
                return postpred_density(y_new, sample, pr);
            };
        }
        return [](double y_new, const std::vector<double>& sample) {
            const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) /
                                static_cast<double>(sample.size());
            return -std::fabs(y_new - mean);
        };
    }
};

// Scores c_1..c_{n+1} for candidate y: c_i scores data[i] against the sample
// with data[i] swapped out for y; c_{n+1} scores y against the data.
inline std::vector<double> conformity_vector(const std::vector<double>& data, double y,
                                             const ScoreFn& score) {
    const std::size_t n = data.size();
    std::vector<double> c(n + 1);
    std::vector<double> swapped = data;
    for (std::size_t i = 0; i < n; ++i) {
        const double held_out = swapped[i];
        swapped[i] = y;
        c[i] = score(held_out, swapped);
        swapped[i] = held_out;
    }
    c[n] = score(y, data);
    return c;
}

// Rank rule: keep y when at least k_level + 1 of the n+1 scores (its own
// included) are <= its score, i.e. its score is not among the k smallest.
inline bool conformal_member(const ConformalConfig& cfg, const ScoreFn& score, double y) {
    const std::vector<double> c = conformity_vector(cfg.data, y, score);
    const double own = c.back();
    long at_or_below = 0;
    for (double ci : c) {
        if (ci <= own) ++at_or_below;
    }
    return at_or_below >= cfg.k_level + 1;
}

inline bool conformal_member(const ConformalConfig& cfg, ConformityScore score, double y) {
    return conformal_member(cfg, cfg.score_fn(score), y);
}

inline RegionResult conformal_region(const ConformalConfig& cfg, ConformityScore score,
                                     int resolution = 2048) {
    const ScoreFn fn = cfg.score_fn(score);
    double mean = 0.0, var = 0.0;
    cfg.prior.predictive(cfg.data, mean, var);
    auto member = [&](double y) { return conformal_member(cfg, fn, y); };
    return invert_membership(member, mean, std::sqrt(var), resolution);
}

struct ExactCoverage {
    long long accepted;  // held-out assignments kept by the rank rule
    long long total;     // n + 1
    bool tied_data;      // duplicate values in the augmented multiset

    double value() const { return static_cast<double>(accepted) / static_cast<double>(total); }
};

// Enumerates the n+1 held-out assignments of the augmented multiset
// {data, augmented_point}. With no ties the rank rule keeps exactly
// n + 1 - k_level of them, so the returned fraction is (n+1-k)/(n+1) as an
// exact rational.
inline ExactCoverage exact_conditional_coverage(const ConformalConfig& cfg,
                                                ConformityScore score,
                                                double augmented_point) {
    const ScoreFn fn = cfg.score_fn(score);
    std::vector<double> pool = cfg.data;
    pool.push_back(augmented_point);
    const std::size_t total = pool.size();

    std::vector<double> sorted = pool;
    std::sort(sorted.begin(), sorted.end());
    const bool tied =
        std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();

    // Each held-out element is scored against the other n points, so the n+1
    // scores do not depend on which element plays the candidate role.
    std::vector<double> s(total);
    std::vector<double> rest(total - 1);
    for (std::size_t j = 0; j < total; ++j) {
        std::size_t w = 0;
        for (std::size_t i = 0; i < total; ++i) {
            if (i != j) rest[w++] = pool[i];
        }
        s[j] = fn(pool[j], rest);
    }
    long long accepted = 0;
    for (std::size_t j = 0; j < total; ++j) {
        long at_or_below = 0;
        for (std::size_t i = 0; i < total; ++i) {
            if (s[i] <= s[j]) ++at_or_below;
        }
        if (at_or_below >= cfg.k_level + 1) ++accepted;
    }
    return {accepted, static_cast<long long>(total), tied};
}

}  // namespace fab
