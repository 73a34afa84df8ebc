#pragma once

#include <cstdint>
#include <vector>

namespace croppat {

/// Frozen pseudo-random generator used by every seeded operation in this
/// project, so that results reproduce bit-for-bit everywhere.
///
/// Algorithm (fully specified, independent of the standard library):
///   - state: xoshiro256** (Blackman & Vigna 2018), seeded by running
///     splitmix64 four times over the 64-bit seed;
///   - uniform double in [0,1): top 53 bits of next_u64() scaled by 2^-53;
///   - uniform integer in [0,n): Lemire's unbiased multiply-shift rejection;
///   - standard normal: Box-Muller on two uniforms, second value cached;
///   - shuffle: Fisher-Yates from the last element down, using below().
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform on [0,1).
    double next_double();

    /// Uniform integer in [0,n), n >= 1. Unbiased.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal draw (mean 0, std 1).
    double next_normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t state_[4];
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

/// splitmix64 finalizer; the building block for seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent child seed from (seed, stream index). Used for
/// per-tree, per-run and per-model random streams so that concurrent
/// construction is bit-equal to sequential construction.
/// Defined as splitmix64 over seed XOR (golden-gamma mixed stream index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace croppat
