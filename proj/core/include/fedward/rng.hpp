#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fedward {

/// Deterministic pseudo-random source for the whole simulator.
///
/// std:: distributions are implementation-defined, so every draw here is
/// built directly on the raw mt19937_64 output stream. Identical seeds give
/// identical sequences on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller (one value per call, two words consumed).
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniform integer in [0, n). Unbiased (Lemire reduction). n must be > 0.
    std::uint64_t bounded(std::uint64_t n);

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct values from {0, ..., n-1}, returned in ascending order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

/// Stream-seed derivation: mixes a base seed with stream tags so that every
/// (client, round, purpose) combination gets an independent generator.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

/// FNV-1a 64-bit hash of a byte string; used for stable config hashes.
std::uint64_t fnv1a64(const void* data, std::size_t len);

}  // namespace fedward
