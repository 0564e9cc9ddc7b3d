#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sdews {

using Rng = std::mt19937_64;

/// Independent random streams derived from one master seed.
enum class Stream : std::uint64_t {
    Chain = 1,
    Brownian = 2,
    Initial = 3,
    ChainStartState = 4,
};

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Seed for trajectory `index` on `stream`. Distinct (stream, index) pairs give
/// statistically independent mt19937_64 states.
constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index) noexcept {
    std::uint64_t h = detail::splitmix64(master);
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(stream));
    return detail::splitmix64(h ^ index);
}

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t index) {
    return Rng{derive_seed(master, stream, index)};
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on the open interval (0, 1).
inline double uniform_open01(Rng& rng) {
    return (static_cast<double>(rng() >> 12) + 0.5) * 0x1.0p-52;
}

/// Exponential(rate) by inverse CDF; strictly positive. `rate` must be positive.
inline double sample_exponential(Rng& rng, double rate) {
    return -std::log1p(-uniform_open01(rng)) / rate;
}

}  // namespace sdews
