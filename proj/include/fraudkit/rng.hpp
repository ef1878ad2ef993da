#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fraudkit {

/// Deterministic random source: mt19937-64 with explicitly-coded draw and
/// shuffle routines, so sequences are identical across standard libraries
/// and platforms for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi], inclusive. Rejection sampling keeps the
    /// draw unbiased and implementation-independent.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        std::uint64_t span = std::uint64_t(hi - lo) + 1;
        if (span == 0) return std::int64_t(next_u64());  // full 64-bit range
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span + 1) % span;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x > limit);
        return lo + std::int64_t(x % span);
    }

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Fisher-Yates shuffle with our own index draws.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            auto j = std::size_t(uniform_int(0, std::int64_t(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Derives an independent deterministic stream (splitmix64 mix of the
    /// parent seed and stream id).
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace fraudkit
