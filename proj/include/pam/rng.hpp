// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random numbers for reproducible parallel Monte Carlo.
//
// Every draw is a pure function of (seed, stream tag, replica id, step index,
// position in the step's stream). Replicas can therefore run on any thread in
// any order and still see bit-identical noise.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace pam::rng {

/// Philox4x32-10 block function (Salmon et al., SC'11).
class Philox4x32 {
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter block(Counter ctr, Key key) noexcept
    {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

  private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter single_round(const Counter& c, const Key& k) noexcept
    {
        const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
        return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
                static_cast<std::uint32_t>(p1),
                static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
                static_cast<std::uint32_t>(p0)};
    }
};

/// SplitMix64 finalizer; used to spread user seeds over the Philox key space.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Independent purposes get distinct stream tags so they never share counters.
enum class StreamTag : std::uint16_t {
    LatticeNoise = 1,
    ContinuumNoise = 2,
    CollisionWalk = 3,
    Test = 0xfff0,
};

namespace detail {

// 256-layer ziggurat tables for the standard normal (Marsaglia & Tsang 2000),
// indexed with 52-bit integer abscissae.
struct ZigguratTables {
    std::array<std::uint64_t, 256> k{};
    std::array<double, 256> w{};
    std::array<double, 256> f{};

    static constexpr double kR = 3.6541528853610088;
    static constexpr double kV = 0.00492867323399;
    static constexpr double kScale = 4503599627370496.0;  // 2^52

    ZigguratTables()
    {
        double dn = kR;
        double tn = dn;
        const double q = kV / std::exp(-0.5 * dn * dn);
        k[0] = static_cast<std::uint64_t>((dn / q) * kScale);
        k[1] = 0;
        w[0] = q / kScale;
        w[255] = dn / kScale;
        f[0] = 1.0;
        f[255] = std::exp(-0.5 * dn * dn);
        for (int i = 254; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(kV / dn + std::exp(-0.5 * dn * dn)));
            k[i + 1] = static_cast<std::uint64_t>((dn / tn) * kScale);
            tn = dn;
            f[i] = std::exp(-0.5 * dn * dn);
            w[i] = dn / kScale;
        }
    }
};

inline const ZigguratTables kZiggurat;

}  // namespace detail

/// Sequential view onto one (seed, tag, replica, step) stream.
///
/// One Philox block keyed by the seed, with counter
///   [0 | step index | replica low | replica high 16 bits + tag],
/// yields the 64-bit state of a SplitMix64 sequence that serves the draws.
class Stream {
  public:
    Stream(std::uint64_t seed, StreamTag tag, std::uint64_t replica, std::uint32_t step) noexcept
    {
        const std::uint64_t k = mix64(seed);
        const Philox4x32::Key key{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        const Philox4x32::Counter ctr{0u, step, static_cast<std::uint32_t>(replica),
                                      static_cast<std::uint32_t>((replica >> 32) & 0xffffu)
                                          | (static_cast<std::uint32_t>(tag) << 16)};
        const auto out = Philox4x32::block(ctr, key);
        state_ = (std::uint64_t{out[1]} << 32) | out[0];
    }

    // UniformRandomBitGenerator interface.
    using result_type = std::uint64_t;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }
    result_type operator()() noexcept { return next_u64(); }

    std::uint64_t next_u64() noexcept
    {
        const std::uint64_t r = mix64(state_);
        state_ += 0x9e3779b97f4a7c15ull;
        return r;
    }

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform() noexcept
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

    double normal() noexcept
    {
        const auto& z = detail::kZiggurat;
        for (;;) {
            std::uint64_t r = next_u64();
            const unsigned idx = static_cast<unsigned>(r & 0xffu);
            r >>= 8;
            const bool negative = (r & 1u) != 0;
            const std::uint64_t rabs = (r >> 1) & 0x000fffffffffffffull;
            double x = static_cast<double>(rabs) * z.w[idx];
            if (negative) x = -x;
            if (rabs < z.k[idx]) return x;
            if (idx == 0) {
                // Tail beyond the base strip.
                for (;;) {
                    const double xx = -std::log(uniform()) / detail::ZigguratTables::kR;
                    const double yy = -std::log(uniform());
                    if (yy + yy > xx * xx)
                        return negative ? -(detail::ZigguratTables::kR + xx)
                                        : detail::ZigguratTables::kR + xx;
                }
            }
            if (z.f[idx] + uniform() * (z.f[idx - 1] - z.f[idx]) < std::exp(-0.5 * x * x))
                return x;
        }
    }

  private:
    std::uint64_t state_ = 0;
};

}  // namespace pam::rng
