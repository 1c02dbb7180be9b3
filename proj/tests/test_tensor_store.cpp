// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "adaflow/aftn.hpp"
#include "adaflow/tensor.hpp"
#include "oracle.hpp"

using adaflow::Tensor;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("adaflow_test_" + name);
}

std::vector<std::uint8_t> header(const char* magic, std::uint32_t version, std::uint32_t ndim,
                                 std::uint32_t reserved = 0) {
    std::vector<std::uint8_t> b(magic, magic + 4);
    for (std::uint32_t v : {version, ndim, reserved})
        for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return b;
}

void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::string failing_field(const std::vector<std::uint8_t>& bytes) {
    try {
        adaflow::aftn::decode(bytes);
    } catch (const adaflow::FormatError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST(TensorStore, TwoByTwoFileIs48Bytes) {
    const Tensor t({2, 2}, {1, 2, 3, 4});
    const auto path = temp_path("2x2.aftn");
    adaflow::tensor_write(t, path);
    EXPECT_EQ(std::filesystem::file_size(path), 16u + 2 * 8 + 4 * 4);
    EXPECT_TRUE(adaflow::bit_equal(adaflow::tensor_read(path), t));
    std::filesystem::remove(path);
}

TEST(TensorStore, ByteLayoutIsLittleEndian) {
    const auto bytes = adaflow::aftn::encode(Tensor({1}, {1.0f}));
    auto expected = header("AFTN", 1, 1);
    put_u64(expected, 1);
    for (std::uint8_t b : {0x00, 0x00, 0x80, 0x3f}) expected.push_back(b);
    EXPECT_EQ(bytes, expected);
}

TEST(TensorStore, SingleZeroRoundTrips) {
    const Tensor t({1}, {0.0f});
    EXPECT_TRUE(adaflow::bit_equal(adaflow::aftn::decode(adaflow::aftn::encode(t)), t));
}

TEST(TensorStore, ZeroExtentShapeRejectedBeforeWrite) {
    const auto path = temp_path("zero.aftn");
    std::filesystem::remove(path);
    EXPECT_THROW(Tensor({3, 0}), adaflow::DimensionError);
    EXPECT_THROW(Tensor(adaflow::Shape{}), adaflow::DimensionError);
    EXPECT_FALSE(std::filesystem::exists(path));
}

TEST(TensorStore, WrongMagic) {
    auto bytes = adaflow::aftn::encode(Tensor({2}, {1, 2}));
    bytes[0] = 'X';
    EXPECT_EQ(failing_field(bytes), "magic");
}

TEST(TensorStore, WrongVersionAndReserved) {
    auto bytes = adaflow::aftn::encode(Tensor({2}, {1, 2}));
    bytes[4] = 2;
    EXPECT_EQ(failing_field(bytes), "version");
    bytes = adaflow::aftn::encode(Tensor({2}, {1, 2}));
    bytes[12] = 1;
    EXPECT_EQ(failing_field(bytes), "reserved");
}

TEST(TensorStore, FourDimsDeclaredThreePresent) {
    auto bytes = header("AFTN", 1, 4);
    for (int i = 0; i < 3; ++i) put_u64(bytes, 1);
    EXPECT_EQ(failing_field(bytes), "dims");
}

TEST(TensorStore, TruncatedAndTrailingPayload) {
    auto bytes = adaflow::aftn::encode(Tensor({3}, {1, 2, 3}));
    auto cut = bytes;
    cut.pop_back();
    EXPECT_EQ(failing_field(cut), "payload");
    auto extra = bytes;
    extra.push_back(0);
    EXPECT_EQ(failing_field(extra), "payload");
}

TEST(TensorStore, ZeroDimsAndOverflowRejected) {
    auto bytes = header("AFTN", 1, 0);
    EXPECT_EQ(failing_field(bytes), "ndim");
    bytes = header("AFTN", 1, 2);
    put_u64(bytes, 3);
    put_u64(bytes, 0);
    EXPECT_EQ(failing_field(bytes), "dims[1]");
    bytes = header("AFTN", 1, 2);
    put_u64(bytes, std::uint64_t{1} << 40);
    put_u64(bytes, std::uint64_t{1} << 40);
    EXPECT_EQ(failing_field(bytes), "dims[1]");
    EXPECT_EQ(failing_field({'A', 'F'}), "header");
}

TEST(TensorStore, MissingFileIsIoError) {
    EXPECT_THROW(adaflow::tensor_read(temp_path("does_not_exist.aftn")), adaflow::IoError);
}

TEST(TensorStore, RandomRoundTripsKeepBits) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        adaflow::Shape shape(1 + rng() % 4);
        for (auto& d : shape) d = 1 + rng() % 5;
        Tensor t(shape);
        for (float& x : t.data()) {
            const std::uint32_t bits = static_cast<std::uint32_t>(rng());
            std::memcpy(&x, &bits, 4);
        }
        const Tensor back = adaflow::aftn::decode(adaflow::aftn::encode(t));
        ASSERT_TRUE(adaflow::bit_equal(back, t));
    }
}

TEST(Resize, IdentityWhenShapesMatch) {
    std::mt19937_64 rng(1);
    const Tensor t = oracle::random_tensor(rng, {3, 5, 2});
    EXPECT_TRUE(adaflow::bit_equal(adaflow::resize_nearest(t, 3, 5), t));
}

TEST(Resize, TwoByTwoToFourByFourBlocks) {
    const Tensor t({2, 2}, {1, 2, 3, 4});
    const Tensor up = adaflow::resize_nearest(t, 4, 4);
    const std::vector<float> expected = {1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4};
    EXPECT_EQ(up.values(), expected);
}

TEST(Resize, FourByFourToTwoByTwoKeepsEvenCells) {
    Tensor t({4, 4});
    for (std::size_t i = 0; i < 16; ++i) t[i] = static_cast<float>(i);
    const Tensor down = adaflow::resize_nearest(t, 2, 2);
    const std::vector<float> expected = {0, 2, 8, 10};
    EXPECT_EQ(down.values(), expected);
}

TEST(Resize, UpThenDownRecovers) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t h = 1 + rng() % 6, w = 1 + rng() % 6;
        const Tensor t = oracle::random_tensor(rng, {h, w, 3});
        const Tensor up = adaflow::resize_nearest(t, 2 * h, 2 * w);
        EXPECT_TRUE(adaflow::bit_equal(adaflow::resize_nearest(up, h, w), t));
    }
}

TEST(Resize, MatchesFloorFormulaOnOddSizes) {
    std::mt19937_64 rng(3);
    const Tensor t = oracle::random_tensor(rng, {5, 7, 2});
    const Tensor out = adaflow::resize_nearest(t, 3, 11);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 11; ++c)
            for (std::size_t k = 0; k < 2; ++k)
                ASSERT_EQ(out[(r * 11 + c) * 2 + k], t[((r * 5 / 3) * 7 + c * 7 / 11) * 2 + k]);
}
