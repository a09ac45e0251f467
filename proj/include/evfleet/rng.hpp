#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace evfleet {

/// Deterministic random stream for one simulation world.
///
/// Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
/// derives all variates with explicit arithmetic instead of the library
/// distributions, so that a given seed produces the same draws on every
/// platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Exponential inter-arrival gap with the given rate (events per unit time).
    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

    /// Unbiased integer in [0, n) via rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    /// True with probability p.
    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 gen_;
};

/// In-place Fisher-Yates shuffle driven by the world stream.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng.uniform_int(i)]);
    }
}

} // namespace evfleet
