// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file bpire/rng.hpp
//! Counter-based Philox4x64-10 engine with key-derived stream splitting.
//---------------------------------------------------------------------------//
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace bpire
{
namespace detail
{
inline void mulhilo64(std::uint64_t a,
                      std::uint64_t b,
                      std::uint64_t& hi,
                      std::uint64_t& lo) noexcept
{
    auto const product = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(product >> 64);
    lo = static_cast<std::uint64_t>(product);
}
}  // namespace detail

using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

/// One Philox4x64 block with 10 rounds (Salmon et al., SC'11).
inline PhiloxCounter philox4x64_10(PhiloxCounter ctr, PhiloxKey key) noexcept
{
    constexpr std::uint64_t mul0 = 0xD2E7470EE14C6C93ull;
    constexpr std::uint64_t mul1 = 0xCA5A826395121157ull;
    constexpr std::uint64_t weyl0 = 0x9E3779B97F4A7C15ull;
    constexpr std::uint64_t weyl1 = 0xBB67AE8584CAA73Bull;

    for (int round = 0; round < 10; ++round)
    {
        if (round > 0)
        {
            key[0] += weyl0;
            key[1] += weyl1;
        }
        std::uint64_t hi0, lo0, hi1, lo1;
        detail::mulhilo64(mul0, ctr[0], hi0, lo0);
        detail::mulhilo64(mul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

//---------------------------------------------------------------------------//
/*!
 * Reproducible random stream.
 *
 * The state is a 128-bit key plus a 128-bit block counter and a substream
 * word. Streams are derived with \c split, which hashes (key, substream,
 * stream id) through one Philox block into a fresh key, or with \c substream,
 * which keeps the key and moves to another counter slice. Neither child
 * depends on how far the parent has advanced. Satisfies UniformRandomBitGenerator so Boost.Random
 * distributions can draw from it.
 */
class Rng
{
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept : key_{seed, 0x6270697265ull} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept
    {
        if (used_ == 4)
        {
            buffer_ = philox4x64_10({ctr_lo_, ctr_hi_, substream_, 0}, key_);
            if (++ctr_lo_ == 0)
                ++ctr_hi_;
            used_ = 0;
        }
        return buffer_[used_++];
    }

    /// Independent child stream; const with respect to this stream.
    [[nodiscard]] Rng split(std::uint64_t stream_id) const noexcept
    {
        auto const block = philox4x64_10(
            {stream_id, substream_, 0x73706c6974ull, 0}, key_);
        return Rng{PhiloxKey{block[0], block[1]}};
    }

    /*!
     * Cheap child stream sharing this key but using a disjoint slice of the
     * counter space. Substreams of one stream are mutually independent and
     * independent of every split() child.
     */
    [[nodiscard]] Rng substream(std::uint64_t id) const noexcept
    {
        Rng child{key_};
        child.substream_ = id + 1;
        return child;
    }

    /// Uniform double on the open interval (0, 1) with 53-bit resolution.
    double uniform01() noexcept
    {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    PhiloxKey const& key() const noexcept { return key_; }

    friend bool operator==(Rng const&, Rng const&) = default;

  private:
    explicit Rng(PhiloxKey key) noexcept : key_{key} {}

    PhiloxKey key_;
    std::uint64_t ctr_lo_ = 0;
    std::uint64_t ctr_hi_ = 0;
    std::uint64_t substream_ = 0;
    PhiloxCounter buffer_{};
    int used_ = 4;
};

}  // namespace bpire
