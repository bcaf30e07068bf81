#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace dgf {

/// Deterministic random source. Wraps std::mt19937_64 (whose output sequence
/// is fully specified by the standard) and converts to doubles with explicit
/// bit arithmetic, so identical seeds give identical streams on every
/// platform. The std::*_distribution adapters are avoided on purpose: their
/// output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * 3.14159265358979323846 * u2;
        spare_ = mag * std::sin(ang);
        have_spare_ = true;
        return mag * std::cos(ang);
    }

    /// Uniform index in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(gen_() % n);
    }

    /// Fisher-Yates shuffle, in place.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Derives an independent sub-stream seed (splitmix64 finalizer over
    /// seed and stream id). Used so fold splits, weight init and dropout
    /// never share a stream.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace dgf
