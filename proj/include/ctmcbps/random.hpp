#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace ctmcbps {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used only to derive well-separated seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic seed for the stream addressed by (seed, k0, k1, ...).
// Streams with distinct keys are independent for all practical purposes,
// which lets per-segment work run in any order or on any thread.
inline std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix64(seed);
    for (std::uint64_t k : keys) {
        h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    }
    return h;
}

inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    return Rng(stream_seed(seed, keys));
}

// Uniform draw on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = u(rng);
    while (x <= 0.0) {
        x = u(rng);
    }
    return x;
}

// Energy gap -log(E), E ~ U(0,1); strictly positive.
inline double energy_gap(Rng& rng) {
    return -std::log(uniform_open(rng));
}

inline double standard_normal(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
}

} // namespace ctmcbps
