// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adaflow/error.hpp"
#include "adaflow/tensor.hpp"

namespace adaflow {

/// Norms below this are treated as zero; cosine similarity against such a vector is 0.
inline constexpr double kZeroNorm = 1e-12;

/// Per-frame feature grids, n x h x w x d, every entry finite.
class FeatureVolume {
public:
    FeatureVolume() = default;

    explicit FeatureVolume(Tensor values) : m_values(std::move(values)) {
        if (m_values.rank() != 4) {
            throw DimensionError("feature volume must be n x h x w x d, got " + shape_to_string(m_values.shape()));
        }
        for (std::size_t i = 0; i < m_values.size(); ++i) {
            if (!std::isfinite(m_values[i])) {
                const std::size_t per_frame = m_values.stride(0);
                throw DataError("non-finite feature value in frame " + std::to_string(i / per_frame));
            }
        }
    }

    std::size_t frames() const { return m_values.dim(0); }
    std::size_t height() const { return m_values.dim(1); }
    std::size_t width() const { return m_values.dim(2); }
    std::size_t channels() const { return m_values.dim(3); }
    std::size_t tokens() const { return height() * width(); }

    std::span<const float> frame(std::size_t i) const {
        if (i >= frames()) {
            throw IndexError("frame " + std::to_string(i) + " out of range for " + std::to_string(frames()) +
                             " frames");
        }
        return m_values.slice(i);
    }
    std::span<const float> token(std::size_t i, std::size_t p) const {
        return frame(i).subspan(p * channels(), channels());
    }
    const Tensor& tensor() const noexcept { return m_values; }

private:
    Tensor m_values;
};

/// h x w grid; cell p holds the best cosine similarity of token p of one frame against all
/// tokens of another.
struct Heatmap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> values;

    float at(std::size_t row, std::size_t col) const { return values[row * width + col]; }

    double mean() const {
        double sum = 0.0;
        for (float v : values) {
            sum += v;
        }
        return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
    }

    Tensor to_tensor() const { return Tensor({height, width}, values); }

    friend bool operator==(const Heatmap&, const Heatmap&) = default;
};

/// Per-token match positions (flat indices into a grid of the same h x w).
struct PositionMap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::int32_t> targets;

    std::size_t size() const noexcept { return targets.size(); }

    static PositionMap identity(std::size_t h, std::size_t w) {
        PositionMap m{h, w, std::vector<std::int32_t>(h * w)};
        for (std::size_t p = 0; p < h * w; ++p) {
            m.targets[p] = static_cast<std::int32_t>(p);
        }
        return m;
    }

    friend bool operator==(const PositionMap&, const PositionMap&) = default;
};

inline double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw DimensionError("cosine_similarity: lengths " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()) + " differ");
    }
    if (a.empty()) {
        throw DimensionError("cosine_similarity: vectors must be non-empty");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += static_cast<double>(a[k]) * b[k];
        na += static_cast<double>(a[k]) * a[k];
        nb += static_cast<double>(b[k]) * b[k];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < kZeroNorm || nb < kZeroNorm) {
        return 0.0;
    }
    return dot / (na * nb);
}

/// Best match of every token of one frame against all tokens of another.
struct FrameMatch {
    Heatmap heatmap;
    PositionMap positions;
};

namespace detail {

// Unit-normalises hw tokens of length d; zero-norm tokens become zero vectors.
// `transpose` lays the result out d x hw.
inline std::vector<double> unit_tokens(std::span<const float> frame, std::size_t tokens, std::size_t d,
                                       bool transpose) {
    std::vector<double> out(tokens * d, 0.0);
    for (std::size_t p = 0; p < tokens; ++p) {
        const float* v = frame.data() + p * d;
        double norm = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            norm += static_cast<double>(v[k]) * v[k];
        }
        norm = std::sqrt(norm);
        if (norm < kZeroNorm) {
            continue;
        }
        const double inv = 1.0 / norm;
        for (std::size_t k = 0; k < d; ++k) {
            out[transpose ? k * tokens + p : p * d + k] = v[k] * inv;
        }
    }
    return out;
}

}  // namespace detail

/// Exhaustive cosine sweep over all token pairs. Norms are computed once per frame; argmax
/// ties (equal after rounding to float) resolve to the lowest flat index.
inline FrameMatch match_frames(std::span<const float> fi, std::span<const float> fj, std::size_t h, std::size_t w,
                               std::size_t d) {
    const std::size_t tokens = h * w;
    if (tokens == 0 || d == 0 || fi.size() != tokens * d || fj.size() != tokens * d) {
        throw DimensionError("match_frames: frames must both hold " + std::to_string(h) + "x" + std::to_string(w) +
                             "x" + std::to_string(d) + " values");
    }
    const auto query = detail::unit_tokens(fi, tokens, d, false);
    const auto target = detail::unit_tokens(fj, tokens, d, true);

    FrameMatch m{{h, w, std::vector<float>(tokens)}, {h, w, std::vector<std::int32_t>(tokens)}};
    std::vector<double> row(tokens);
    for (std::size_t p = 0; p < tokens; ++p) {
        std::fill(row.begin(), row.end(), 0.0);
        const double* a = query.data() + p * d;
        for (std::size_t k = 0; k < d; ++k) {
            const double ak = a[k];
            if (ak == 0.0) {
                continue;
            }
            const double* bt = target.data() + k * tokens;
            for (std::size_t q = 0; q < tokens; ++q) {
                row[q] += ak * bt[q];
            }
        }
        // compared at storage precision so that reassociation noise cannot break a tie
        std::size_t best = 0;
        float best_value = static_cast<float>(row[0]);
        for (std::size_t q = 1; q < tokens; ++q) {
            const float v = static_cast<float>(row[q]);
            if (v > best_value) {
                best = q;
                best_value = v;
            }
        }
        m.heatmap.values[p] = best_value;
        m.positions.targets[p] = static_cast<std::int32_t>(best);
    }
    return m;
}

namespace detail {

inline void check_frame_pair(const Tensor& fi, const Tensor& fj) {
    if (fi.rank() != 3 || fi.shape() != fj.shape()) {
        throw DimensionError("frame features must both be h x w x d, got " + shape_to_string(fi.shape()) + " and " +
                             shape_to_string(fj.shape()));
    }
}

}  // namespace detail

/// Value at p = max over tokens q of frame j of CS(f_i^p, f_j^q). Frames are h x w x d.
inline Heatmap heatmap(const Tensor& fi, const Tensor& fj) {
    detail::check_frame_pair(fi, fj);
    return match_frames(fi.data(), fj.data(), fi.dim(0), fi.dim(1), fi.dim(2)).heatmap;
}

inline Heatmap heatmap(const FeatureVolume& f, std::size_t i, std::size_t j) {
    return match_frames(f.frame(i), f.frame(j), f.height(), f.width(), f.channels()).heatmap;
}

/// targets[p] = argmax_q CS(f_i^p, f_j^q), lowest q on ties.
inline PositionMap correspondence_map(const Tensor& fi, const Tensor& fj) {
    detail::check_frame_pair(fi, fj);
    return match_frames(fi.data(), fj.data(), fi.dim(0), fi.dim(1), fi.dim(2)).positions;
}

inline PositionMap correspondence_map(const FeatureVolume& f, std::size_t i, std::size_t j) {
    return match_frames(f.frame(i), f.frame(j), f.height(), f.width(), f.channels()).positions;
}

/// Frame `i` of a feature volume as an h x w x d tensor.
inline Tensor frame_tensor(const FeatureVolume& f, std::size_t i) {
    const auto s = f.frame(i);
    return Tensor({f.height(), f.width(), f.channels()}, std::vector<float>(s.begin(), s.end()));
}

}  // namespace adaflow
