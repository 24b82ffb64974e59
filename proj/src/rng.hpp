// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_RNG_HPP
#define TDSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

#include "digest.hpp"

namespace tdsim {

// Deterministic counter-based generator (splitmix64 core). The standard
// library engines are portable but its distributions are not, so all
// draws are implemented here.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : state_(seed) {}

    // Independent substream: hash the parent seed with a label so draw
    // order in one stream never perturbs another.
    static DetRng derive(std::uint64_t seed, std::string_view label) {
        Hasher h;
        std::uint8_t s[8];
        for (int i = 0; i < 8; ++i) s[i] = static_cast<std::uint8_t>(seed >> (8 * i));
        h.update(std::span<const std::uint8_t>(s, 8)).update(label);
        Digest d = h.finalize();
        std::uint64_t x = 0;
        for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(d[i]) << (8 * i);
        return DetRng(x);
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n), unbiased by rejection.
    std::uint64_t uniform(std::uint64_t n) {
        if (n == 0) return 0;
        std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
        std::uint64_t x;
        do { x = next_u64(); } while (x >= limit);
        return x % n;
    }

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Exponential with the given mean.
    double exponential(double mean) {
        double u;
        do { u = uniform01(); } while (u <= 0.0);
        return -mean * std::log(u);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

} // namespace tdsim

#endif
