#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace leadnet {

/// One step of the splitmix64 sequence. Used both to expand seeds and to
/// derive per-run seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for run `index` of a batch started from `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return splitmix64(master ^ index);
}

/**
 * xoshiro256** generator (Blackman & Vigna), state expanded from a 64-bit
 * seed with successive splitmix64 outputs. Satisfies
 * UniformRandomBitGenerator so it can drive <random> distributions, but the
 * simulation only uses the helpers below, whose output is fully specified
 * here and therefore portable across standard libraries.
 */
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed = 0) noexcept { reseed(seed); }

    /// Starts from a raw xoshiro state (not all zero).
    static RngStream from_state(const std::array<std::uint64_t, 4>& state) noexcept
    {
        RngStream r;
        r.s_ = state;
        return r;
    }

    void reseed(std::uint64_t seed) noexcept
    {
        std::uint64_t x = seed;
        for (auto& word : s_) {
            word = splitmix64(x);
            x += 0x9E3779B97F4A7C15ULL;
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) noexcept
    {
        if (p <= 0.0) {
            return false;
        }
        if (p >= 1.0) {
            return true;
        }
        return uniform01() < p;
    }

    /// Unbiased integer in [0, bound) by Lemire's multiply-and-reject method.
    /// bound must be non-zero.
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<__uint128_t>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    std::array<std::uint64_t, 4> state() const noexcept { return s_; }

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

} // namespace leadnet
