#pragma once

#include <cstdint>
#include <initializer_list>

#include "caprecap/math.hpp"

namespace caprecap {

// Stream labels so that independent uses of the same (seed, rep) never
// collide: rng streams are keyed by (seed, label, indices...).
enum class Stream : std::uint64_t {
    population = 1,
    noise = 2,
    folds = 3,
    scenario = 4,
    check = 5,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Keyed counter-based generator: the stream is a pure function of
// (seed, key...), so any subset of replications/folds can be recomputed in
// isolation, serially or in parallel, with identical draws.
class KeyedRng {
public:
    KeyedRng(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
        state_ = 0x853c49e6748fea9bULL ^ seed;
        detail::splitmix64(state_);
        for (std::uint64_t k : key) {
            state_ ^= 0x2545f4914f6cdd1dULL * (k + 0x9e3779b97f4a7c15ULL);
            detail::splitmix64(state_);
        }
    }
    KeyedRng(std::uint64_t seed, Stream s, std::uint64_t a = 0, std::uint64_t b = 0)
        : KeyedRng(seed, {static_cast<std::uint64_t>(s), a, b}) {}

    std::uint64_t next_u64() { return detail::splitmix64(state_); }

    // Uniform on (0,1): never returns an exact endpoint.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Inverse-CDF normal draw; one uniform per variate.
    double normal(double mean = 0.0, double sd = 1.0) {
        return mean + sd * normal_quantile(uniform());
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection to remove modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

private:
    std::uint64_t state_;
};

}  // namespace caprecap
