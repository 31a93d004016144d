#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace habm
{

/// 64-bit finalizer from splitmix64. Bijective, so distinct inputs never collide.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept
{
    return mix64(seed ^ mix64(value + 0x632be59bd9b4e019ULL));
}

template <class... Ts>
constexpr std::uint64_t hash_values(std::uint64_t seed, Ts... values) noexcept
{
    ((seed = hash_combine(seed, static_cast<std::uint64_t>(values))), ...);
    return seed;
}

inline std::uint64_t double_bits(double v) noexcept
{
    return std::bit_cast<std::uint64_t>(v);
}

/// Purposes of the keyed random substreams. Each stochastic decision in the
/// model draws from a stream keyed by (seed, step, entity, purpose), so the
/// outcome never depends on the order in which entities are visited.
enum class Stream : std::uint64_t
{
    Founder = 1,
    Death,
    Forage,
    Speaker,
    Birth,
    Offspring,
    FoodRegen,
    FoodInit,
};

/// Small counter-style generator (splitmix64 sequence). Cheap to construct,
/// which matters because a fresh stream is opened per agent per step.
class Rng
{
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept
        : m_state(seed)
    {
    }

    template <class... Ts>
    static Rng substream(std::uint64_t seed, Stream purpose, Ts... keys) noexcept
    {
        return Rng(hash_values(seed, static_cast<std::uint64_t>(purpose), keys...));
    }

    static constexpr result_type min() noexcept
    {
        return 0;
    }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept
    {
        m_state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = m_state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept
    {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) noexcept
    {
        return uniform() < p;
    }

    /// Standard normal via Box-Muller. Written out rather than using
    /// std::normal_distribution so output files match across standard libraries.
    double normal() noexcept
    {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) noexcept
    {
        return mean + sd * normal();
    }

private:
    std::uint64_t m_state;
};

} // namespace habm
