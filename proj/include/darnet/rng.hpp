#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace darnet
{
//! SplitMix64 finaliser, used to turn consecutive stream ids into
//! decorrelated engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/*!
 * Seedable randomness source shared by every stochastic operation.
 *
 * All variates are derived from raw 64-bit words of a Mersenne twister, so
 * a given seed produces the same stream on every platform (the standard
 * distribution classes are implementation-defined and are avoided here).
 * Each call consumes exactly one word.
 */
class Rng
{
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    //! Child stream for sub-task \c index; independent of the parent state.
    static Rng stream(std::uint64_t seed, std::uint64_t index)
    {
        return Rng(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
    }

    std::uint64_t bits() { return engine_(); }

    //! Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    //! Uniform index in [0, n).
    std::size_t index(std::size_t n)
    {
        auto wide = static_cast<unsigned __int128>(bits()) * n;
        return static_cast<std::size_t>(wide >> 64);
    }

    bool coin() { return (bits() >> 63) != 0; }

    bool bernoulli(double p) { return uniform() < p; }

    //! Exponential variate with the given rate.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  private:
    std::mt19937_64 engine_;
};
}  // namespace darnet
