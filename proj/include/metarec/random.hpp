#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>

namespace metarec {

// Seeded randomness. The standard distributions are implementation-defined,
// so everything that must be reproducible across platforms goes through the
// helpers below on top of std::mt19937_64 (whose output sequence is fixed).

using Engine = std::mt19937_64;

/// One step of the splitmix64 mixer; used to derive independent seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a stream index.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// 64-bit FNV-1a, stable across runs and platforms (unlike std::hash).
constexpr std::uint64_t fnv1a(std::string_view text,
                              std::uint64_t hash = 0xCBF29CE484222325ULL) noexcept {
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

/// Uniform integer in [0, bound) by rejection sampling. bound must be > 0.
inline std::uint64_t uniform_below(Engine& engine, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = engine();
    while (draw >= limit) draw = engine();
    return draw % bound;
}

/// Uniform real in [0, 1) with 53 random bits.
inline double uniform_unit(Engine& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Standard normal draw (Box-Muller, one value per call).
double standard_normal(Engine& engine);

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::span<T> values, Engine& engine) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(engine, i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace metarec
