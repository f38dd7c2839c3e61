#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

// Portable deterministic sampling. The standard distributions are
// implementation-defined, so anything that feeds a checkpoint or a sampled
// pair list goes through these helpers instead.
namespace kgi::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from a master seed and a stream tag.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
}

// Uniform in [0, 1) with 53 random bits.
inline double unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

using Engine = std::mt19937_64;

inline double uniform01(Engine& e) { return unit(e()); }

inline double uniform(Engine& e, double lo, double hi) { return lo + (hi - lo) * uniform01(e); }

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_index(Engine& e, std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
        x = e();
    } while (x >= limit);
    return x % n;
}

template <typename T>
void shuffle(std::vector<T>& v, Engine& e) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(e, i));
        std::swap(v[i - 1], v[j]);
    }
}

// Box-Muller on two counter-derived uniforms.
inline double normal_at(std::uint64_t key, std::uint64_t counter) {
    const double u1 = unit(splitmix64(key + 2 * counter)) + 0x1.0p-54;
    const double u2 = unit(splitmix64(key + 2 * counter + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace kgi::rng
