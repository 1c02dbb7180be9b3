// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// AFTN tensor interchange format, all integers little-endian:
//
//   bytes  0..3   magic "AFTN"
//   bytes  4..7   version (u32) = 1
//   bytes  8..11  ndim (u32)
//   bytes 12..15  reserved, zero
//   ndim x u64    dims
//   prod(dims) x f32 payload, row-major
//
// No padding, no footer.

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "adaflow/error.hpp"
#include "adaflow/tensor.hpp"

namespace adaflow::aftn {

inline constexpr std::array<char, 4> kMagic = {'A', 'F', 'T', 'N'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 16;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

inline std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode(const Tensor& t) {
    const std::size_t count = checked_element_count(t.shape());
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + 8 * t.rank() + 4 * count);
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    detail::put_u32(out, kVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(t.rank()));
    detail::put_u32(out, 0);
    for (std::size_t d : t.shape()) {
        detail::put_u64(out, d);
    }
    for (float f : t.data()) {
        detail::put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
    return out;
}

inline Tensor decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes) {
        throw FormatError("header", "file holds " + std::to_string(bytes.size()) + " bytes, header needs 16");
    }
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw FormatError("magic", "expected \"AFTN\"");
    }
    const std::uint32_t version = detail::get_u32(&bytes[4]);
    if (version != kVersion) {
        throw FormatError("version", "unsupported version " + std::to_string(version));
    }
    const std::uint32_t ndim = detail::get_u32(&bytes[8]);
    if (ndim == 0) {
        throw FormatError("ndim", "tensor must have at least one dimension");
    }
    if (detail::get_u32(&bytes[12]) != 0) {
        throw FormatError("reserved", "reserved header word must be zero");
    }
    const std::size_t dims_end = kHeaderBytes + 8 * static_cast<std::size_t>(ndim);
    if (bytes.size() < dims_end) {
        const std::size_t present = (bytes.size() - kHeaderBytes) / 8;
        throw FormatError("dims", "truncated: header declares " + std::to_string(ndim) + " dims but file holds " +
                                      std::to_string(present) + " dim entries");
    }
    Shape shape(ndim);
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < ndim; ++i) {
        const std::uint64_t d = detail::get_u64(&bytes[kHeaderBytes + 8 * i]);
        const std::string field = "dims[" + std::to_string(i) + "]";
        if (d == 0) {
            throw FormatError(field, "dimension is zero");
        }
        if (__builtin_mul_overflow(count, d, &count) || count > (SIZE_MAX / 4)) {
            throw FormatError(field, "dimension product overflows");
        }
        shape[i] = static_cast<std::size_t>(d);
    }
    const std::size_t payload = bytes.size() - dims_end;
    if (payload / 4 < count) {
        throw FormatError("payload", "truncated: expected " + std::to_string(count * 4) + " bytes, found " +
                                         std::to_string(payload));
    }
    if (payload != count * 4) {
        throw FormatError("payload", std::to_string(payload - count * 4) + " trailing bytes after payload");
    }
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = std::bit_cast<float>(detail::get_u32(&bytes[dims_end + 4 * i]));
    }
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace adaflow::aftn

namespace adaflow {

/// Writes `t` as AFTN. The shape is validated before the file is opened.
inline void tensor_write(const Tensor& t, const std::filesystem::path& path) {
    const auto bytes = aftn::encode(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

inline Tensor tensor_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return aftn::decode(bytes);
}

}  // namespace adaflow
