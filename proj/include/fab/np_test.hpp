#pragma once

// Optimal acceptance sets for finite testing problems: minimize risk mass
// subject to a floor on covered probability mass, by thresholding the
// density ratio p/r.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fab {

struct FiniteTestProblem {
    std::vector<std::string> outcomes;
    std::vector<double> p_mass;  // probability mass per outcome, sums to 1
    std::vector<double> r_mass;  // nonnegative risk mass per outcome
    double target;               // required coverage level (1 - alpha)

    FiniteTestProblem(std::vector<std::string> outcomes_, std::vector<double> p,
                      std::vector<double> r, double target_)
        : outcomes(std::move(outcomes_)),
          p_mass(std::move(p)),
          r_mass(std::move(r)),
          target(target_) {
        const std::size_t n = outcomes.size();
        if (n < 1 || p_mass.size() != n || r_mass.size() != n) {
            throw std::invalid_argument("FiniteTestProblem: lists must have equal length >= 1");
        }
        double psum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(p_mass[i] >= 0.0)) {
                throw std::invalid_argument("FiniteTestProblem: p_mass must be nonnegative");
            }
            if (!(r_mass[i] >= 0.0)) {
                throw std::invalid_argument("FiniteTestProblem: r_mass must be nonnegative");
            }
            psum += p_mass[i];
        }
        if (std::fabs(psum - 1.0) > 1e-12) {
            throw std::invalid_argument("FiniteTestProblem: p_mass must sum to 1");
        }
        if (!(target > 0.0 && target < 1.0)) {
            throw std::invalid_argument("FiniteTestProblem: target must be in (0,1)");
        }
    }
};

// Builds the acceptance set by taking outcomes in decreasing order of the
// ratio p/r (r = 0 with p > 0 counts as infinite ratio) until the covered
// P-mass reaches the target. Ties at the threshold are broken by stable
// input order. Returns the selected indices in input order.
inline std::vector<std::size_t> np_optimal_set(const FiniteTestProblem& problem) {
    const std::size_t n = problem.outcomes.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto ratio = [&](std::size_t i) {
        const double p = problem.p_mass[i];
        const double r = problem.r_mass[i];
        if (r > 0.0) return p / r;
        return p > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ratio(a) > ratio(b); });

    std::vector<std::size_t> chosen;
    double covered = 0.0;
    for (std::size_t i : order) {
        if (covered >= problem.target - 1e-12) break;
        chosen.push_back(i);
        covered += problem.p_mass[i];
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

inline double p_mass_of(const FiniteTestProblem& problem, const std::vector<std::size_t>& set) {
    double s = 0.0;
    for (std::size_t i : set) s += problem.p_mass[i];
    return s;
}

inline double r_mass_of(const FiniteTestProblem& problem, const std::vector<std::size_t>& set) {
    double s = 0.0;
    for (std::size_t i : set) s += problem.r_mass[i];
    return s;
}

}  // namespace fab
