#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace dropkan {

/// splitmix64 mixing step; used to derive independent child seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Fold an arbitrary tag sequence into a base seed. Every experiment run,
/// search evaluation and measurement pass gets its own stream via
/// mix_seed(master, tag...), so results do not depend on scheduling order.
template <typename... Tags>
std::uint64_t mix_seed(std::uint64_t base, Tags... tags) {
    std::uint64_t s = base;
    ((s = splitmix64(s) ^ (static_cast<std::uint64_t>(tags) * 0x9e3779b97f4a7c15ULL)), ...);
    std::uint64_t fin = s;
    return splitmix64(fin);
}

/// Deterministic PRNG. The engine is std::mt19937_64 (bit-exact across
/// platforms by the standard); all distributions are hand-rolled on top of
/// it because the std distribution objects are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller; two engine draws per call.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform01();
        double u2 = uniform01();
        // Guard u1 == 0 before the log.
        double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// 1 with probability keep_prob, else 0.
    int bernoulli_keep(double keep_prob) { return uniform01() < keep_prob ? 1 : 0; }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    /// Fisher-Yates with a fixed traversal order (descending index).
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace dropkan
