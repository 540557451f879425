#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fab {

namespace detail {

// Finalizer of the splitmix64 generator (Steele, Lea & Flood 2014; Vigna's
// fixed-increment variant). Bijective on 64-bit words.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

// Counter-based splitmix64 stream. Substreams are derived from
// (master_seed, index), so splitting work across threads by index cannot
// change any draw.
class RngStream {
  public:
    explicit RngStream(std::uint64_t state) noexcept : state_(state) {}

    static RngStream seeded(std::uint64_t seed) noexcept {
        return RngStream(detail::mix64(seed + detail::kGolden));
    }

    static RngStream substream(std::uint64_t master_seed, std::uint64_t index) noexcept {
        std::uint64_t s = detail::mix64(master_seed + detail::kGolden);
        s = detail::mix64(s ^ (index * detail::kGolden + 0x452821e638d01377ULL));
        return RngStream(s);
    }

    std::uint64_t next_u64() noexcept {
        state_ += detail::kGolden;
        return detail::mix64(state_);
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0,1]; safe as a log() argument.
    double uniform_pos() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via the trigonometric Box-Muller transform. Draws are
    // produced in pairs; the second is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Chi-square with integer df, as a sum of squared normals.
    double chisq(int df) {
        if (df < 1) throw std::domain_error("RngStream::chisq: df must be >= 1");
        double s = 0.0;
        for (int i = 0; i < df; ++i) {
            const double z = normal();
            s += z * z;
        }
        return s;
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fab
