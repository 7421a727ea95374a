#pragma once

#include <cstdint>

namespace mrs {

// SplitMix64 (Steele, Lea & Flood, "Fast splittable pseudorandom number
// generators"). One 64-bit word of state. Every random stream in this
// project is a SplitMix64 whose seed is derived with mix64 below, so any
// (seed, indices...) tuple names the same stream on every platform.
class SplitMix64 {
  public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~std::uint64_t{0}; }

    result_type operator()() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t state_;
};

// One stateless SplitMix64 output step; the project-wide 64-bit mixing hash.
inline std::uint64_t mix64(std::uint64_t x) {
    std::uint64_t z = x + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stream derivation: fold each index into the key with one mix64 round.
inline std::uint64_t derive_stream(std::uint64_t seed) { return mix64(seed); }

template <class... Rest>
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index, Rest... rest) {
    return derive_stream(mix64(seed) ^ index, rest...);
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(SplitMix64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_real(SplitMix64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

// Uniform integer in [lo, hi], inclusive, unbiased via rejection.
inline std::int64_t uniform_int(SplitMix64& g, std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(g());  // full 64-bit range
    const std::uint64_t limit = SplitMix64::max() - SplitMix64::max() % span;
    std::uint64_t draw;
    do {
        draw = g();
    } while (draw >= limit);
    return lo + static_cast<std::int64_t>(draw % span);
}

}  // namespace mrs
