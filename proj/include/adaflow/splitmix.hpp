// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace adaflow {

/// SplitMix64 finalizer applied to `x + golden gamma` (https://prng.di.unimi.it).
constexpr std::uint64_t splitmix64_mix(std::uint64_t x) noexcept {
    std::uint64_t z = x + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Multiply-shift reduction of a 64-bit word onto [0, bound) (Lemire).
constexpr std::uint64_t bounded_reduce(std::uint64_t word, std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(word) * bound) >> 64);
}

/// Counter-based draw: the word depends only on (seed, a, b), never on call order.
constexpr std::uint64_t keyed_word(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
    return splitmix64_mix(splitmix64_mix(splitmix64_mix(seed) ^ a) ^ b);
}

/// Sequential SplitMix64 stream. Used for synthetic data and stub weights where only
/// run-to-run reproducibility matters.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : m_state(seed) {}

    constexpr std::uint64_t next() noexcept {
        const std::uint64_t out = splitmix64_mix(m_state);
        m_state += 0x9e3779b97f4a7c15ull;
        return out;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    std::uint64_t below(std::uint64_t bound) noexcept { return bounded_reduce(next(), bound); }

    /// Standard normal via Box-Muller; one value per call.
    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t m_state;
};

}  // namespace adaflow
