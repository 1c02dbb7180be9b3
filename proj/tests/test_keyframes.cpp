// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "adaflow/keyframes.hpp"
#include "adaflow/splitmix.hpp"

namespace {

// SplitMix64 output function, written out from its published constants.
std::uint64_t reference_mix(std::uint64_t x) {
    std::uint64_t z = x + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::size_t reference_offset(std::uint64_t seed, std::uint64_t t, std::uint64_t k, std::uint64_t len) {
    const std::uint64_t word = reference_mix(reference_mix(reference_mix(seed) ^ t) ^ k);
    return static_cast<std::size_t>((static_cast<unsigned __int128>(word) * len) >> 64);
}

}  // namespace

TEST(SplitMix, KnownSequence) {
    adaflow::SplitMix64 rng(1234567);
    const std::uint64_t expected[] = {6457827717110365317ull, 3203168211198807973ull, 9817491932198370423ull,
                                      4593380528125082431ull, 16408922859458223821ull};
    for (std::uint64_t e : expected) EXPECT_EQ(rng.next(), e);
}

TEST(Keyframes, OffsetsMatchReferenceDerivation) {
    for (std::uint64_t seed : {0ull, 7ull, 0xdeadbeefull})
        for (std::size_t t = 0; t < 20; ++t)
            for (std::size_t k = 0; k < 5; ++k)
                for (std::size_t len : {1u, 2u, 7u, 10u, 1000u})
                    ASSERT_EQ(adaflow::keyframe_offset(seed, t, k, len), reference_offset(seed, t, k, len));
}

TEST(Keyframes, UnitClipsForceTheStart) {
    const adaflow::ClipPartition p{4, {0, 1, 2, 3}};
    const auto s = adaflow::select_keyframes(p, 10, 99);
    for (const auto& row : s.frames) EXPECT_EQ(row, p.starts);
}

TEST(Keyframes, SameSeedSameScheduleDifferentSeedDiffers) {
    const adaflow::ClipPartition p{10, {0}};
    EXPECT_EQ(adaflow::select_keyframes(p, 50, 1), adaflow::select_keyframes(p, 50, 1));
    EXPECT_NE(adaflow::select_keyframes(p, 50, 1).frames, adaflow::select_keyframes(p, 50, 2).frames);
}

TEST(Keyframes, RangeContainment) {
    const adaflow::ClipPartition p{8, {0, 5}};
    const auto s = adaflow::select_keyframes(p, 2, 7);
    ASSERT_EQ(s.frames.size(), 2u);
    for (const auto& row : s.frames) {
        EXPECT_LE(row[0], 4u);
        EXPECT_GE(row[1], 5u);
        EXPECT_LE(row[1], 7u);
    }
}

TEST(Keyframes, FixedModeUsesClipStarts) {
    const adaflow::ClipPartition p{12, {0, 3, 9}};
    const auto s = adaflow::select_keyframes(p, 5, 3, adaflow::KeyframeMode::fixed);
    for (const auto& row : s.frames) EXPECT_EQ(row, p.starts);
}

TEST(Keyframes, Errors) {
    EXPECT_THROW(adaflow::select_keyframes(adaflow::ClipPartition{}, 5, 0), adaflow::DataError);
    EXPECT_THROW(adaflow::select_keyframes(adaflow::ClipPartition{3, {0}}, 0, 0), adaflow::ConfigError);
}

// With T = 4 * len draws, a frame is missed with probability (1 - 1/len)^T, about 1.8% for
// len = 10. Requiring each frame to be hit in at least 95 of 100 seeds leaves ample slack.
TEST(Keyframes, CoverageTendency) {
    const std::size_t len = 10, timesteps = 4 * len;
    const adaflow::ClipPartition p{len + 6, {0, len}};
    std::vector<int> hit_runs(p.frames, 0);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto s = adaflow::select_keyframes(p, timesteps, seed);
        std::vector<bool> hit(p.frames, false);
        for (const auto& row : s.frames)
            for (std::size_t f : row) hit[f] = true;
        for (std::size_t f = 0; f < p.frames; ++f) hit_runs[f] += hit[f];
    }
    for (std::size_t f = 0; f < p.frames; ++f) EXPECT_GE(hit_runs[f], 95) << "frame " << f;
}
