// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file tests/test_rng.cpp
//---------------------------------------------------------------------------//
#include "bpire/rng.hpp"

#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

namespace bpire
{
namespace
{
TEST(Philox, MatchesReferenceZeroVector)
{
    auto const out = philox4x64_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x16554d9eca36314cull);
    EXPECT_EQ(out[1], 0xdb20fe9d672d0fdcull);
    EXPECT_EQ(out[2], 0xd7e772cee186176bull);
    EXPECT_EQ(out[3], 0x7e68b68aec7ba23bull);
}

// Random123 known-answer vectors for philox4x64-10.
TEST(Philox, MatchesReferencePiVector)
{
    auto const out = philox4x64_10({0x243f6a8885a308d3ull,
                                    0x13198a2e03707344ull,
                                    0xa4093822299f31d0ull,
                                    0x082efa98ec4e6c89ull},
                                   {0x452821e638d01377ull, 0xbe5466cf34e90c6cull});
    EXPECT_EQ(out[0], 0xa528f45403e61d95ull);
    EXPECT_EQ(out[1], 0x38c72dbd566e9788ull);
    EXPECT_EQ(out[2], 0xa5a1610e72fd18b5ull);
    EXPECT_EQ(out[3], 0x57bd43b5e52b7fe6ull);
}

std::vector<std::uint64_t> draw(Rng rng, int n)
{
    std::vector<std::uint64_t> out;
    for (int i = 0; i < n; ++i)
        out.push_back(rng());
    return out;
}

TEST(Rng, SameSeedSameSequence)
{
    EXPECT_EQ(draw(Rng(42), 100), draw(Rng(42), 100));
    EXPECT_NE(draw(Rng(42), 8), draw(Rng(43), 8));
}

TEST(Rng, SplitDoesNotDependOnParentPosition)
{
    Rng a(7);
    Rng b(7);
    for (int i = 0; i < 13; ++i)
        b();
    EXPECT_EQ(draw(a.split(5), 20), draw(b.split(5), 20));
    EXPECT_EQ(draw(a.substream(5), 20), draw(b.substream(5), 20));
}

TEST(Rng, ChildrenAreDistinct)
{
    Rng const master(1);
    std::set<std::uint64_t> firsts;
    for (std::uint64_t id = 0; id < 1000; ++id)
    {
        firsts.insert(draw(master.split(id), 1)[0]);
        firsts.insert(draw(master.substream(id), 1)[0]);
    }
    firsts.insert(draw(master, 1)[0]);
    EXPECT_EQ(firsts.size(), 2001u);
}

TEST(Rng, SplitsOfSubstreamsDiffer)
{
    Rng const master(1);
    EXPECT_NE(draw(master.substream(0).split(0), 4),
              draw(master.substream(1).split(0), 4));
    EXPECT_NE(draw(master.split(0), 4), draw(master.substream(0).split(0), 4));
}

TEST(Rng, UniformIsInOpenUnitIntervalWithCorrectMoments)
{
    Rng rng(3);
    double sum = 0, sum_sq = 0;
    int const n = 1000000;
    for (int i = 0; i < n; ++i)
    {
        double const u = rng.uniform01();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sum_sq += u * u;
    }
    // Var(U) = 1/12, Var(U^2) = 4/45.
    EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
    EXPECT_NEAR(sum_sq / n, 1.0 / 3, 4 * std::sqrt(4.0 / 45 / n));
}

TEST(Rng, BitsAreBalanced)
{
    Rng rng(11);
    int const n = 100000;
    std::vector<int> ones(64, 0);
    for (int i = 0; i < n; ++i)
    {
        auto const x = rng();
        for (int b = 0; b < 64; ++b)
            ones[b] += (x >> b) & 1u;
    }
    double const se = std::sqrt(0.25 / n);
    for (int b = 0; b < 64; ++b)
        EXPECT_NEAR(ones[b] / double(n), 0.5, 5 * se) << "bit " << b;
}

}  // namespace
}  // namespace bpire
