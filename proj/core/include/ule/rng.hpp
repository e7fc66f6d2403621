#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace ule {

// SplitMix64-based generator. Used everywhere instead of <random> engines so
// that sampling is integer-stable and seeds reproduce across standard library
// versions. Counter-based substreams (Rng::substream) let per-user generation
// run in parallel while producing output identical to a sequential pass.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 1) : state_(seed + GOLDEN) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += GOLDEN);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n) without modulo bias (rejection on the top range).
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Box-Muller. One value per call; the sibling value is discarded to keep
    // the stream position independent of call parity.
    double next_normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * mag * std::cos(2.0 * PI * u2);
    }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(first[i - 1], first[j]);
        }
    }

    // Independent stream for item `index`, derived from this generator's seed
    // without consuming from it.
    Rng substream(std::uint64_t index) const {
        Rng r;
        r.state_ = mix(state_ ^ mix(index + 0x9e3779b97f4a7c15ULL));
        return r;
    }

  private:
    static constexpr std::uint64_t GOLDEN = 0x9e3779b97f4a7c15ULL;
    static constexpr double PI = 3.14159265358979323846;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
        z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
        return z ^ (z >> 33);
    }

    std::uint64_t state_;
};

}  // namespace ule
