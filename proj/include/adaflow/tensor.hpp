// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adaflow/error.hpp"

namespace adaflow {

using Shape = std::vector<std::size_t>;

inline std::string shape_to_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i != 0) {
            s += ",";
        }
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

/// Element count of `shape`. Throws DimensionError on an empty shape, a zero extent, or overflow.
inline std::size_t checked_element_count(const Shape& shape) {
    if (shape.empty()) {
        throw DimensionError("tensor shape must have at least one dimension");
    }
    std::size_t count = 1;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (shape[i] == 0) {
            throw DimensionError("tensor dimension " + std::to_string(i) + " is zero in shape " +
                                 shape_to_string(shape));
        }
        if (__builtin_mul_overflow(count, shape[i], &count)) {
            throw DimensionError("element count overflows for shape " + shape_to_string(shape));
        }
    }
    return count;
}

/// Dense row-major float32 tensor. Every extent is >= 1 and the payload length always
/// equals the product of the extents.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape, float fill = 0.0f)
        : m_shape(std::move(shape)), m_data(checked_element_count(m_shape), fill) {}

    Tensor(Shape shape, std::vector<float> data) : m_shape(std::move(shape)), m_data(std::move(data)) {
        const std::size_t count = checked_element_count(m_shape);
        if (count != m_data.size()) {
            throw DimensionError("shape " + shape_to_string(m_shape) + " needs " + std::to_string(count) +
                                 " values, got " + std::to_string(m_data.size()));
        }
    }

    const Shape& shape() const noexcept { return m_shape; }
    std::size_t rank() const noexcept { return m_shape.size(); }
    std::size_t dim(std::size_t axis) const { return m_shape.at(axis); }
    std::size_t size() const noexcept { return m_data.size(); }
    bool empty() const noexcept { return m_data.empty(); }

    std::span<float> data() noexcept { return m_data; }
    std::span<const float> data() const noexcept { return m_data; }
    std::vector<float>& values() noexcept { return m_data; }
    const std::vector<float>& values() const noexcept { return m_data; }

    float& operator[](std::size_t i) noexcept { return m_data[i]; }
    float operator[](std::size_t i) const noexcept { return m_data[i]; }

    /// Product of the extents after `axis` (the stride of `axis`).
    std::size_t stride(std::size_t axis) const {
        std::size_t s = 1;
        for (std::size_t i = axis + 1; i < m_shape.size(); ++i) {
            s *= m_shape[i];
        }
        return s;
    }

    /// Contiguous slice for index `i` along the leading axis.
    std::span<const float> slice(std::size_t i) const {
        const std::size_t s = stride(0);
        return std::span<const float>(m_data).subspan(i * s, s);
    }
    std::span<float> slice(std::size_t i) {
        const std::size_t s = stride(0);
        return std::span<float>(m_data).subspan(i * s, s);
    }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.m_shape == b.m_shape && a.m_data == b.m_data;
    }

private:
    Shape m_shape;
    std::vector<float> m_data;
};

/// Bitwise equality of shape and payload (distinguishes -0.0/0.0 and NaN payloads).
inline bool bit_equal(const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape() &&
           std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

/// 0-based cell address in an h x w grid.
struct GridIndex {
    std::size_t row = 0;
    std::size_t col = 0;

    std::size_t flat(std::size_t width) const noexcept { return row * width + col; }
    static GridIndex from_flat(std::size_t flat, std::size_t width) noexcept {
        return {flat / width, flat % width};
    }
    friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// Source cell for output cell `out` when resizing an axis of length `in_len` to `out_len`.
inline std::size_t nearest_source(std::size_t out, std::size_t in_len, std::size_t out_len) noexcept {
    return out * in_len / out_len;
}

/// Nearest-neighbour resize of the two leading axes. Output cell (r, c) copies source cell
/// (floor(r*h/out_h), floor(c*w/out_w)); trailing axes are carried unchanged.
inline Tensor resize_nearest(const Tensor& src, std::size_t out_h, std::size_t out_w) {
    if (src.rank() < 2) {
        throw DimensionError("resize_nearest needs a tensor with at least two axes, got " +
                             shape_to_string(src.shape()));
    }
    if (out_h == 0 || out_w == 0) {
        throw DimensionError("resize_nearest target must be at least 1x1");
    }
    const std::size_t h = src.dim(0);
    const std::size_t w = src.dim(1);
    const std::size_t cell = src.stride(1);
    Shape out_shape = src.shape();
    out_shape[0] = out_h;
    out_shape[1] = out_w;
    if (h == out_h && w == out_w) {
        return src;
    }
    Tensor out(out_shape);
    const auto in = src.data();
    auto dst = out.data();
    for (std::size_t r = 0; r < out_h; ++r) {
        const std::size_t sr = nearest_source(r, h, out_h);
        for (std::size_t c = 0; c < out_w; ++c) {
            const std::size_t sc = nearest_source(c, w, out_w);
            std::memcpy(&dst[(r * out_w + c) * cell], &in[(sr * w + sc) * cell], cell * sizeof(float));
        }
    }
    return out;
}

}  // namespace adaflow
