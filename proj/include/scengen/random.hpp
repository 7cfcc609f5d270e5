#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <cstdint>
#include <string_view>

namespace scengen {

/// SplitMix64 finalizer; used to derive keys and per-stage seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed for a named stage: mix64(root ^ fnv1a64(stage)). Stages can be rerun
/// independently and still draw the same numbers.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view stage) noexcept {
    return mix64(root ^ fnv1a64(stage));
}

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

/// Stateless counter-based generator. A draw is a pure function of
/// (seed, stream, major, minor), so any subset of draws can be produced in any
/// order or on any thread with identical results.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept {
        const std::uint64_t k = mix64(seed ^ mix64(stream));
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    }

    std::array<std::uint32_t, 4> block(std::uint64_t major, std::uint64_t minor) const noexcept {
        return philox4x32({static_cast<std::uint32_t>(minor), static_cast<std::uint32_t>(minor >> 32),
                           static_cast<std::uint32_t>(major), static_cast<std::uint32_t>(major >> 32)},
                          key_);
    }

    /// Uniform in the open interval (0, 1), 53-bit resolution.
    double uniform(std::uint64_t major, std::uint64_t minor) const noexcept {
        const auto b = block(major, minor);
        const std::uint64_t bits = (static_cast<std::uint64_t>(b[0]) << 32 | b[1]) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal. Cells 2k and 2k+1 share one block through Box-Muller,
    /// so the value depends only on (seed, stream, major, cell).
    double normal(std::uint64_t major, std::uint64_t cell) const noexcept {
        const auto b = block(major, cell >> 1);
        const std::uint64_t w0 = (static_cast<std::uint64_t>(b[0]) << 32 | b[1]) >> 11;
        const std::uint64_t w1 = (static_cast<std::uint64_t>(b[2]) << 32 | b[3]) >> 11;
        const double u0 = (static_cast<double>(w0) + 0.5) * 0x1.0p-53;
        const double u1 = static_cast<double>(w1) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u0));
        const double angle = 2.0 * std::numbers::pi * u1;
        return (cell & 1) ? r * std::sin(angle) : r * std::cos(angle);
    }

private:
    std::array<std::uint32_t, 2> key_{};
};

/// Sequential view over a CounterRng for code that just wants "the next"
/// number (shuffles, synthetic data).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) noexcept : rng_(seed, stream) {}

    double uniform() noexcept { return rng_.uniform(0, counter_++); }
    double normal() noexcept { return rng_.normal(2, counter_++); }

    /// Uniform integer in [0, n). Rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        for (;;) {
            const auto b = rng_.block(1, counter_++);
            const std::uint64_t x = static_cast<std::uint64_t>(b[0]) << 32 | b[1];
            if (x < limit) return x % n;
        }
    }

    template <class RandomIt>
    void shuffle(RandomIt first, RandomIt last) noexcept {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const auto j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    CounterRng rng_;
    std::uint64_t counter_ = 0;
};

}  // namespace scengen
