#pragma once

#include <cmath>
#include <cstdint>

namespace saom {

namespace detail {

/// splitmix64 finalizer (Steele, Lea & Flood). Used both to expand seeds into
/// engine state and to derive independent per-chain streams.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// Deterministic xoshiro256++ generator seeded via splitmix64.
///
/// The standard library engines are portable but its distributions are not;
/// every sampling routine here is spelled out so that a (seed, inputs) pair
/// yields bit-identical streams on any conforming platform. The algorithm
/// name is recorded in run metadata.
class rng {
  public:
    static constexpr const char* algorithm = "xoshiro256++ / splitmix64 stream derivation";

    explicit rng(std::uint64_t seed) {
        std::uint64_t z = seed;
        for (auto& word : state_) {
            z = detail::splitmix64_mix(z);
            word = z;
        }
    }

    /// Stable seed for a sub-stream (chain, period, phase, ...) of a base seed.
    static std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
        return detail::splitmix64_mix(base ^ detail::splitmix64_mix(stream + 0x632be59bd9b4e019ULL));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Lemire's multiply-shift map; the residual
    /// bias of ~n/2^64 is immaterial at the n used here.
    std::uint64_t uniform_int(std::uint64_t n) {
        const auto wide = static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
        return static_cast<std::uint64_t>(wide >> 64);
    }

    /// Poisson draw by multiplicative inversion, chunked so the method stays
    /// exact for large means (a Poisson(m) is the sum of independent smaller
    /// Poissons).
    long poisson(double mean) {
        long total = 0;
        while (mean > 20.0) {
            total += poisson_small(20.0);
            mean -= 20.0;
        }
        if (mean > 0.0) total += poisson_small(mean);
        return total;
    }

  private:
    long poisson_small(double mean) {
        const double limit = std::exp(-mean);
        long k = 0;
        double product = next_unit();
        while (product > limit) {
            ++k;
            product *= next_unit();
        }
        return k;
    }

    std::uint64_t state_[4] = {};
};

}  // namespace saom
