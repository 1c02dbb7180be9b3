// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "adaflow/partition.hpp"
#include "adaflow/synth.hpp"
#include "oracle.hpp"

using adaflow::Tensor;

namespace {

adaflow::Heatmap filled(std::size_t h, std::size_t w, float v) {
    return adaflow::Heatmap{h, w, std::vector<float>(h * w, v)};
}

// The partition recurrence written out directly, with brute-force heatmaps.
std::vector<std::size_t> reference_partition(const adaflow::FeatureVolume& f, const adaflow::PartitionParams& prm) {
    const std::size_t n = f.frames(), h = f.height(), w = f.width(), d = f.channels();
    std::vector<std::size_t> starts;
    std::size_t i = 0, j = 1;
    while (j < n) {
        const auto m = oracle::brute_match(f.frame(i).data(), f.frame(j).data(), h * w, d);
        std::vector<double> heat(m.best.begin(), m.best.end());
        for (double& v : heat) v = static_cast<float>(v);
        double mean = 0;
        for (double v : heat) mean += v;
        mean /= double(heat.size());
        if (mean < prm.mean_threshold ||
            !oracle::brute_window_ok(heat, h, w, prm.window, prm.step, prm.window_threshold)) {
            starts.push_back(i);
            i = prm.boundary == adaflow::BoundaryRule::literal ? j + 1 : j;
            j = i + 1;
        } else {
            ++j;
        }
    }
    starts.push_back(i);
    std::vector<std::size_t> out;
    for (std::size_t s : starts)
        if (s < n && (out.empty() || s > out.back())) out.push_back(s);
    if (out.empty() || out.front() != 0) out.insert(out.begin(), 0);
    return out;
}

adaflow::SyntheticSpec two_scene() {
    adaflow::SyntheticSpec s;
    s.frames = 20;
    s.scene_lengths = {10, 10};
    s.channels = 64;
    s.seed = 21;
    return s;
}

}  // namespace

TEST(WindowCheck, AllOnesPasses) { EXPECT_TRUE(adaflow::window_check(filled(10, 10, 1.0f), 4, 2, 0.6)); }

TEST(WindowCheck, ZeroBlockAlignedToWindowFails) {
    auto h = filled(10, 10, 0.9f);
    for (std::size_t r = 2; r < 6; ++r)
        for (std::size_t c = 4; c < 8; ++c) h.values[r * 10 + c] = 0.0f;
    EXPECT_FALSE(adaflow::window_check(h, 4, 2, 0.6));
}

TEST(WindowCheck, LargeWindowDegradesToWholeGrid) {
    EXPECT_TRUE(adaflow::window_check(filled(3, 3, 0.7f), 42, 21, 0.6));
    EXPECT_FALSE(adaflow::window_check(filled(3, 3, 0.5f), 42, 21, 0.6));
}

TEST(WindowCheck, ClampedLastWindowSeesTheCorner) {
    // 7x7 grid, window 4, step 3: origins 0, 3 reach the edge exactly; with step 2 the
    // placements 0, 2 leave column 6 uncovered unless the final window is clamped to 3.
    auto h = filled(7, 7, 1.0f);
    for (std::size_t r = 3; r < 7; ++r)
        for (std::size_t c = 5; c < 7; ++c) h.values[r * 7 + c] = -1.0f;
    EXPECT_FALSE(adaflow::window_check(h, 4, 2, 0.6));
    EXPECT_EQ(adaflow::detail::window_origins(7, 4, 2), (std::vector<std::size_t>{0, 2, 3}));
    EXPECT_EQ(adaflow::detail::window_origins(7, 4, 3), (std::vector<std::size_t>{0, 3}));
}

TEST(WindowCheck, MatchesBruteForce) {
    std::mt19937_64 rng(30);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t h = 1 + rng() % 12, w = 1 + rng() % 12, l = 1 + rng() % 8, s = 1 + rng() % l;
        adaflow::Heatmap hm{h, w, std::vector<float>(h * w)};
        const double base = u(rng);
        for (float& v : hm.values) v = static_cast<float>(base + 0.5 * (u(rng) - 0.5));
        std::vector<double> ref(hm.values.begin(), hm.values.end());
        const double ws = 0.3 + 0.5 * u(rng);
        ASSERT_EQ(adaflow::window_check(hm, l, s, ws), oracle::brute_window_ok(ref, h, w, l, s, ws));
    }
}

TEST(PartitionParams, Validation) {
    adaflow::PartitionParams p;
    EXPECT_EQ(p.window, 42u);
    EXPECT_EQ(p.step, 21u);
    EXPECT_DOUBLE_EQ(p.mean_threshold, 0.75);
    EXPECT_DOUBLE_EQ(p.window_threshold, 0.6);
    EXPECT_EQ(p.boundary, adaflow::BoundaryRule::literal);
    p.step = 50;
    EXPECT_THROW(p.validate(), adaflow::ConfigError);
    p = {};
    p.mean_threshold = 1.5;
    EXPECT_THROW(p.validate(), adaflow::ConfigError);
    EXPECT_THROW(adaflow::parse_boundary_rule("loose"), adaflow::ConfigError);
}

TEST(Partition, SingleFrame) {
    std::mt19937_64 rng(31);
    const adaflow::FeatureVolume f(oracle::random_tensor(rng, {1, 2, 2, 3}));
    EXPECT_EQ(adaflow::adaptive_partition(f, {}).starts, (std::vector<std::size_t>{0}));
}

TEST(Partition, ConstantVideoIsOneClip) {
    std::mt19937_64 rng(32);
    const Tensor one = oracle::random_tensor(rng, {1, 3, 3, 5});
    Tensor all({6, 3, 3, 5});
    for (std::size_t i = 0; i < 6; ++i) std::copy(one.data().begin(), one.data().end(), all.slice(i).begin());
    EXPECT_EQ(adaflow::adaptive_partition(adaflow::FeatureVolume(all), {}).starts, (std::vector<std::size_t>{0}));
}

TEST(Partition, TwoSceneLiteralAndStrict) {
    const auto video = adaflow::synth_video(two_scene());
    adaflow::PartitionParams p;
    EXPECT_EQ(adaflow::adaptive_partition(video.features, p).starts, (std::vector<std::size_t>{0, 11}));
    p.boundary = adaflow::BoundaryRule::strict;
    EXPECT_EQ(adaflow::adaptive_partition(video.features, p).starts, (std::vector<std::size_t>{0, 10}));
}

TEST(Partition, MatchesPseudocodeOnRandomVolumes) {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng() % 12, h = 1 + rng() % 4, w = 1 + rng() % 4, d = 2 + rng() % 6;
        // slowly drifting tokens so that pairs straddle the thresholds
        Tensor t({n, h, w, d});
        const Tensor base = oracle::random_tensor(rng, {h, w, d});
        const double drift = 0.2 + u(rng);
        for (std::size_t i = 0; i < n; ++i) {
            const Tensor step = oracle::random_tensor(rng, {h, w, d});
            for (std::size_t k = 0; k < h * w * d; ++k)
                t[i * h * w * d + k] = static_cast<float>(base[k] + drift * double(i) * 0.3 * step[k]);
        }
        const adaflow::FeatureVolume f(t);
        adaflow::PartitionParams p;
        p.window = 1 + rng() % 3;
        p.step = 1 + rng() % p.window;
        p.mean_threshold = 0.5 + 0.5 * u(rng);
        p.window_threshold = 0.4 + 0.5 * u(rng);
        p.boundary = rng() % 2 ? adaflow::BoundaryRule::literal : adaflow::BoundaryRule::strict;
        const auto got = adaflow::adaptive_partition(f, p);
        ASSERT_EQ(got.starts, reference_partition(f, p)) << "trial " << trial;
        ASSERT_NO_THROW(got.validate());
    }
}

TEST(Partition, CoverageAndMonotoneInMeanThreshold) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto spec = two_scene();
        spec.seed = seed;
        spec.frames = 18;
        spec.scene_lengths = {6, 5, 7};
        spec.channels = 48;
        const auto video = adaflow::synth_video(spec);
        std::size_t previous = 0;
        for (double ms : {-1.0, 0.0, 0.5, 0.75, 0.9, 0.95, 0.99, 1.0}) {
            adaflow::PartitionParams p;
            p.mean_threshold = ms;
            p.window_threshold = -1.0;
            const auto part = adaflow::adaptive_partition(video.features, p);
            std::vector<int> covered(part.frames, 0);
            for (std::size_t k = 0; k < part.clip_count(); ++k)
                for (std::size_t i = part.clip_begin(k); i < part.clip_end(k); ++i) ++covered[i];
            for (int c : covered) ASSERT_EQ(c, 1);
            ASSERT_GE(part.clip_count(), previous);
            previous = part.clip_count();
        }
    }
}

TEST(Partition, ExtremeThresholds) {
    std::mt19937_64 rng(34);
    const adaflow::FeatureVolume f(oracle::random_tensor(rng, {9, 3, 3, 4}));
    adaflow::PartitionParams p;
    p.mean_threshold = -1.0;
    p.window_threshold = -1.0;
    EXPECT_EQ(adaflow::adaptive_partition(f, p).clip_count(), 1u);
    p.mean_threshold = 1.0;
    // every consecutive pair fails: starts 0, 2, 4, 6, 8
    EXPECT_EQ(adaflow::adaptive_partition(f, p).starts, (std::vector<std::size_t>{0, 2, 4, 6, 8}));
}

TEST(Partition, ClipQueries) {
    adaflow::ClipPartition p{10, {0, 4, 7}};
    EXPECT_EQ(p.clip_count(), 3u);
    EXPECT_EQ(p.clip_of(6), 1u);
    EXPECT_EQ(p.clip_end(2), 10u);
    EXPECT_EQ(p.clip_length(0), 4u);
    EXPECT_THROW((adaflow::ClipPartition{10, {1, 4}}.validate()), adaflow::DataError);
    EXPECT_THROW((adaflow::ClipPartition{10, {0, 4, 4}}.validate()), adaflow::DataError);
}

TEST(YtDiagnostic, Examples) {
    std::mt19937_64 rng(35);
    const Tensor one = oracle::random_tensor(rng, {1, 4, 5, 2});
    const auto single = adaflow::yt_diagnostic(one, adaflow::ClipPartition{1, {0}});
    ASSERT_EQ(single.plot.shape(), (adaflow::Shape{4, 1, 2}));
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(single.plot[r * 2 + c], one[(r * 5 + 2) * 2 + c]);
    EXPECT_TRUE(single.boundaries.empty());

    Tensor consts({3, 2, 3, 1});
    for (std::size_t i = 0; i < 3; ++i)
        for (float& x : consts.slice(i)) x = static_cast<float>(i + 1);
    const auto yt = adaflow::yt_diagnostic(consts, adaflow::ClipPartition{3, {0, 2}});
    EXPECT_EQ(yt.plot.values(), (std::vector<float>{1, 2, 3, 1, 2, 3}));
    EXPECT_EQ(yt.boundaries, (std::vector<std::size_t>{2}));
}
