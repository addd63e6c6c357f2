#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace edlab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A pure function of (counter, key): no hidden state, so any walker and any
/// step can be drawn independently and in any order.
class Philox4x32
{
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit constexpr Philox4x32(Key key) noexcept : key_(key) {}
    explicit constexpr Philox4x32(std::uint64_t seed) noexcept
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}
    {
    }

    constexpr Counter operator()(Counter ctr) const noexcept
    {
        Key k = key_;
        for (int round = 0; round < 10; ++round)
        {
            if (round)
            {
                k[0] += kWeyl0;
                k[1] += kWeyl1;
            }
            std::uint64_t const p0 = std::uint64_t(kMul0) * ctr[0];
            std::uint64_t const p1 = std::uint64_t(kMul1) * ctr[2];
            ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ k[0], std::uint32_t(p1),
                   std::uint32_t(p0 >> 32) ^ ctr[3] ^ k[1], std::uint32_t(p0)};
        }
        return ctr;
    }

  private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

    Key key_;
};

/// Uniform on the open interval (0, 1) from 64 random bits (52 used).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept
{
    std::uint64_t const bits = ((std::uint64_t(hi) << 32) | lo) >> 12;
    return (double(bits) + 0.5) * 0x1.0p-52;
}

/// Standard normals for one walker at one step. Counter layout:
/// (block, step, walker low word, walker high word), so the draw depends only
/// on (seed, walker_id, step_index) and never on scheduling.
class WalkerStream
{
  public:
    WalkerStream(std::uint64_t seed, std::uint64_t walker_id) noexcept
        : gen_(seed), walker_(walker_id)
    {
    }

    /// Fill out[0..count) (count <= 4) with independent N(0,1) draws for the
    /// given step, via Box-Muller on pairs of uniforms.
    template<class Out>
    void normals(std::uint32_t step, Out& out, std::size_t count) const noexcept
    {
        for (std::uint32_t block = 0; 2 * block < count; ++block)
        {
            auto const r = gen_({block, step, std::uint32_t(walker_),
                                 std::uint32_t(walker_ >> 32)});
            double const u1 = to_open_unit(r[0], r[1]);
            double const u2 = to_open_unit(r[2], r[3]);
            double const radius = std::sqrt(-2.0 * std::log(u1));
            double const angle = 2.0 * std::numbers::pi * u2;
            out[2 * block] = radius * std::cos(angle);
            if (2 * block + 1 < count)
                out[2 * block + 1] = radius * std::sin(angle);
        }
    }

  private:
    Philox4x32 gen_;
    std::uint64_t walker_;
};

}  // namespace edlab
