#pragma once

// Extraction of acceptance regions from a membership predicate: 1D interval
// inversion by grid scan plus bisection refinement, and 2D area by cell
// counting. Regions are reported faithfully; non-contiguous ones are flagged,
// never convexified.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

struct RegionResult {
    std::vector<Interval> intervals;  // disjoint, sorted; empty for 2D results
    double total_measure = 0.0;       // summed length (1D) or area (2D)
    long n_evals = 0;                 // membership evaluations spent
    bool contiguous = false;          // exactly one interval / one 2D component
    double err_bound = 0.0;           // discretization bound (2D cell counting)

    bool empty() const { return total_measure == 0.0 && intervals.empty(); }
};

namespace detail {

template <class Member>
double refine_edge(Member& member, double rejected, double accepted, double tol, long& evals) {
    while (std::fabs(accepted - rejected) > tol) {
        const double mid = 0.5 * (rejected + accepted);
        ++evals;
        if (member(mid)) {
            accepted = mid;
        } else {
            rejected = mid;
        }
    }
    return 0.5 * (rejected + accepted);
}

}  // namespace detail

// Recovers {y : member(y)} as a union of intervals. The search window starts
// at center +/- 10*half_width_hint and doubles (at most 6 times) until both
// window endpoints are rejected; acceptance still touching the window edge is
// an error, since truncating it would bias measured volumes. Sign changes on
// the scan grid are refined by bisection to |hi-lo| < 1e-9*half_width_hint.
template <class Member>
RegionResult invert_membership(Member&& member, double center, double half_width_hint,
                               int resolution = 2048) {
    if (!(half_width_hint > 0.0) || !std::isfinite(half_width_hint)) {
        throw std::invalid_argument("invert_membership: half_width_hint must be positive");
    }
    if (resolution < 8) {
        throw std::invalid_argument("invert_membership: resolution must be >= 8");
    }

    RegionResult out;
    double w = 10.0 * half_width_hint;
    int doublings = 0;
    for (;;) {
        out.n_evals += 2;
        const bool edge = member(center - w) || member(center + w);
        if (!edge) break;
        if (++doublings > 6) {
            throw std::runtime_error(
                "invert_membership: unbounded region (acceptance at window edge "
                "after 6 doublings)");
        }
        w *= 2.0;
    }

    const double lo = center - w;
    const double step = 2.0 * w / (resolution - 1);
    std::vector<char> acc(static_cast<std::size_t>(resolution));
    acc.front() = 0;  // window endpoints already known rejected
    acc.back() = 0;
    for (int i = 1; i + 1 < resolution; ++i) {
        ++out.n_evals;
        acc[static_cast<std::size_t>(i)] = member(lo + i * step) ? 1 : 0;
    }

    const double tol = 1e-9 * half_width_hint;
    double open_lo = 0.0;
    bool open = false;
    for (int i = 0; i + 1 < resolution; ++i) {
        const bool a = acc[static_cast<std::size_t>(i)];
        const bool b = acc[static_cast<std::size_t>(i + 1)];
        if (!a && b) {
            open_lo = detail::refine_edge(member, lo + i * step, lo + (i + 1) * step, tol,
                                          out.n_evals);
            open = true;
        } else if (a && !b) {
            const double hi =
                detail::refine_edge(member, lo + (i + 1) * step, lo + i * step, tol,
                                    out.n_evals);
            out.intervals.push_back({open_lo, hi});
            open = false;
        }
    }
    (void)open;

    for (const Interval& iv : out.intervals) out.total_measure += iv.length();
    out.contiguous = out.intervals.size() == 1;
    out.err_bound = 2.0 * tol * static_cast<double>(out.intervals.size());
    return out;
}

// 2D area of {(y1,y2) : member(y1,y2)} by counting accepted cell centers on a
// grid_n x grid_n grid. The window doubles while acceptance reaches its
// outermost cell ring. err_bound is (perimeter cells) x (cell area);
// contiguous reports whether the accepted cells form one 4-connected block.
template <class Member2D>
RegionResult grid_region_2d(Member2D&& member, double cx, double cy, double half_width,
                            int grid_n = 512) {
    if (!(half_width > 0.0) || grid_n < 8) {
        throw std::invalid_argument("grid_region_2d: bad window or grid size");
    }
    RegionResult out;
    std::vector<char> acc;
    for (int attempt = 0;; ++attempt) {
        const double cell = 2.0 * half_width / grid_n;
        acc.assign(static_cast<std::size_t>(grid_n) * grid_n, 0);
        bool edge_hit = false;
        for (int i = 0; i < grid_n; ++i) {
            const double y1 = cx - half_width + (i + 0.5) * cell;
            for (int j = 0; j < grid_n; ++j) {
                const double y2 = cy - half_width + (j + 0.5) * cell;
                ++out.n_evals;
                if (member(y1, y2)) {
                    acc[static_cast<std::size_t>(i) * grid_n + j] = 1;
                    if (i == 0 || j == 0 || i == grid_n - 1 || j == grid_n - 1) {
                        edge_hit = true;
                    }
                }
            }
        }
        if (!edge_hit) break;
        if (attempt >= 6) {
            throw std::runtime_error(
                "grid_region_2d: unbounded region (acceptance at window edge after 6 "
                "doublings)");
        }
        half_width *= 2.0;
    }

    const double cell = 2.0 * half_width / grid_n;
    const double cell_area = cell * cell;
    auto idx = [grid_n](int i, int j) { return static_cast<std::size_t>(i) * grid_n + j; };

    long n_acc = 0;
    long n_perim = 0;
    for (int i = 0; i < grid_n; ++i) {
        for (int j = 0; j < grid_n; ++j) {
            if (!acc[idx(i, j)]) continue;
            ++n_acc;
            const bool interior = i > 0 && i < grid_n - 1 && j > 0 && j < grid_n - 1 &&
                                  acc[idx(i - 1, j)] && acc[idx(i + 1, j)] &&
                                  acc[idx(i, j - 1)] && acc[idx(i, j + 1)];
            if (!interior) ++n_perim;
        }
    }
    out.total_measure = static_cast<double>(n_acc) * cell_area;
    out.err_bound = static_cast<double>(n_perim) * cell_area;

    // component count by flood fill
    int components = 0;
    std::vector<char> seen(acc.size(), 0);
    std::vector<std::pair<int, int>> stack;
    for (int i = 0; i < grid_n && components < 2; ++i) {
        for (int j = 0; j < grid_n && components < 2; ++j) {
            if (!acc[idx(i, j)] || seen[idx(i, j)]) continue;
            ++components;
            stack.push_back({i, j});
            seen[idx(i, j)] = 1;
            while (!stack.empty()) {
                auto [a, b] = stack.back();
                stack.pop_back();
                const int di[4] = {-1, 1, 0, 0};
                const int dj[4] = {0, 0, -1, 1};
                for (int d = 0; d < 4; ++d) {
                    const int na = a + di[d], nb = b + dj[d];
                    if (na < 0 || nb < 0 || na >= grid_n || nb >= grid_n) continue;
                    if (!acc[idx(na, nb)] || seen[idx(na, nb)]) continue;
                    seen[idx(na, nb)] = 1;
                    stack.push_back({na, nb});
                }
            }
        }
    }
    out.contiguous = components == 1;
    return out;
}

}  // namespace fab
