#pragma once

// Seeded random streams with platform-stable output.
//
// std::mt19937_64 has a fully specified bit stream, but the standard
// distributions (<random>) are implementation-defined, so two standard
// libraries can disagree on the values they draw. Every sampler here is
// implemented directly on the raw 64-bit stream so that a given seed
// produces the same numbers on every platform.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace ibci {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used to spread seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Derives the seed for a named sub-stream of a run seed. The mixing is
// fixed so that adding streams (e.g. more layers) never perturbs the
// draws of existing ones: stream s always maps to splitmix64(root + g*(s+1)).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    return splitmix64(root + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

// Reserved stream ids. Layer draws use the 1-based layer index directly,
// so named streams live far away from small integers.
namespace stream {
inline constexpr std::uint64_t kScoringSubset = 0;         // layers are 1..D
inline constexpr std::uint64_t kShuffle = 0x53485546;      // "SHUF"
inline constexpr std::uint64_t kTrainSubset = 0x54535542;  // "TSUB"
inline constexpr std::uint64_t kAlphaSearch = 0x414C5048;  // "ALPH"
inline constexpr std::uint64_t kSubsetBaseline = 0x52535542;  // "RSUB"
}  // namespace stream

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Standard normal via Box-Muller. Consumes two uniforms per value and
    // never caches, so the draw sequence is a pure function of call count.
    double normal() {
        const double u1 = static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;        // [0, 1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    // Fisher-Yates permutation of {0..n-1}.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace ibci
