#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace kmodels {

/**
 * @brief Seeded random source used everywhere randomness is needed.
 *
 * Bits come from std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Every derived draw (uniforms, bounded integers, normals) is
 * computed here rather than through the <random> distributions, whose
 * algorithms are implementation defined. Normals use the Marsaglia polar
 * method on 53-bit uniforms, caching the second variate of each pair.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();

    /// Uniform integer on [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal variate.
    double normal();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// SplitMix64 finalizer. Used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace kmodels
