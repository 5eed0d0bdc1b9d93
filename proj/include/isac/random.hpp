// SPDX-License-Identifier: Apache-2.0
//
// Seedable random streams. Every Monte Carlo trial owns a generator derived
// from (master seed, trial index, stream id), so results do not depend on the
// order in which trials run.

#ifndef ISAC_RANDOM_HPP
#define ISAC_RANDOM_HPP

#include "isac/core.hpp"

#include <cstdint>
#include <random>

namespace isac {

using Rng = std::mt19937_64;

enum class Stream : std::uint32_t { channel = 0, estimation = 1, detection = 2 };

inline Rng make_stream(std::uint64_t seed, std::uint64_t trial, Stream stream = Stream::channel)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

/// CN(0, variance): real and imaginary parts iid N(0, variance / 2).
inline Complex complex_normal(Rng& rng, double variance = 1.0)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

/// Unit-modulus symbol with a uniform random phase.
inline Complex unit_phase(Rng& rng)
{
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * kPi);
    return std::polar(1.0, uniform(rng));
}

} // namespace isac

#endif // ISAC_RANDOM_HPP
