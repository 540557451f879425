#pragma once

// Seeded replicate engine. Each replicate draws from a substream derived from
// (seed, replicate index), and results are combined by compensated summation
// in index order, so estimates are bit-identical for any thread count.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fab/rng.hpp"

namespace fab {

enum class Quantity { coverage, expected_measure };

struct SimReport {
    double estimate = 0.0;
    double std_error = 0.0;
    long n_reps = 0;
    std::uint64_t seed = 0;
    Quantity quantity = Quantity::coverage;
    std::string config_digest;
};

inline int mc_threads() {
    if (const char* env = std::getenv("FAB_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) return t;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace detail {

inline void kahan_add(double value, double& sum, double& carry) {
    const double y = value - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
}

}  // namespace detail

// Runs fn once per replicate on its own substream, in parallel. fn must be a
// pure function of the stream it is handed.
template <class ReplicateFn>
SimReport run_replicates(ReplicateFn&& fn, long n_reps, std::uint64_t seed, Quantity quantity,
                         std::string config_digest) {
    if (n_reps < 1) throw std::invalid_argument("run_replicates: n_reps must be >= 1");
    std::vector<double> values(static_cast<std::size_t>(n_reps));

    const int n_threads = static_cast<int>(std::min<long>(mc_threads(), n_reps));
    std::atomic<long> cursor{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        constexpr long kChunk = 256;
        for (;;) {
            const long begin = cursor.fetch_add(kChunk);
            if (begin >= n_reps || failed.load()) break;
            const long end = std::min(begin + kChunk, n_reps);
            try {
                for (long i = begin; i < end; ++i) {
                    RngStream stream = RngStream::substream(seed, static_cast<std::uint64_t>(i));
                    values[static_cast<std::size_t>(i)] = fn(stream);
                }
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                break;
            }
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    double sum = 0.0, carry = 0.0;
    for (double v : values) detail::kahan_add(v, sum, carry);
    const double mean = sum / static_cast<double>(n_reps);

    double se;
    if (quantity == Quantity::coverage) {
        se = std::sqrt(std::max(mean * (1.0 - mean), 0.0) / static_cast<double>(n_reps));
    } else {
        double ss = 0.0, ss_carry = 0.0;
        for (double v : values) detail::kahan_add((v - mean) * (v - mean), ss, ss_carry);
        const double var = n_reps > 1 ? ss / static_cast<double>(n_reps - 1) : 0.0;
        se = std::sqrt(var / static_cast<double>(n_reps));
    }

    SimReport report;
    report.estimate = mean;
    report.std_error = se;
    report.n_reps = n_reps;
    report.seed = seed;
    report.quantity = quantity;
    report.config_digest = std::move(config_digest);
    return report;
}

}  // namespace fab
