// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "adaflow/error.hpp"
#include "adaflow/heatmap_cache.hpp"
#include "adaflow/similarity.hpp"
#include "adaflow/tensor.hpp"

namespace adaflow {

/// What happens to the frame j that failed the similarity test against clip start i.
enum class BoundaryRule {
    literal,  ///< clip is [i, j], next clip starts at j + 1
    strict,   ///< clip is [i, j - 1], next clip starts at j
};

inline BoundaryRule parse_boundary_rule(const std::string& s) {
    if (s == "literal") {
        return BoundaryRule::literal;
    }
    if (s == "strict") {
        return BoundaryRule::strict;
    }
    throw ConfigError("boundary must be 'literal' or 'strict', got '" + s + "'");
}

inline std::string to_string(BoundaryRule rule) { return rule == BoundaryRule::literal ? "literal" : "strict"; }

/// Thresholds and sliding-window geometry, in heatmap cells.
struct PartitionParams {
    std::size_t window = 42;
    std::size_t step = 21;
    double mean_threshold = 0.75;
    double window_threshold = 0.6;
    BoundaryRule boundary = BoundaryRule::literal;

    void validate() const {
        if (step < 1 || step > window) {
            throw ConfigError("partition step must satisfy 1 <= step <= window (step " + std::to_string(step) +
                              ", window " + std::to_string(window) + ")");
        }
        if (mean_threshold < -1.0 || mean_threshold > 1.0 || window_threshold < -1.0 || window_threshold > 1.0) {
            throw ConfigError("partition thresholds must lie in [-1, 1]");
        }
    }
};

/// Ordered 0-based clip starts over `frames` frames. Clip k spans [starts[k], starts[k+1]).
struct ClipPartition {
    std::size_t frames = 0;
    std::vector<std::size_t> starts;

    std::size_t clip_count() const noexcept { return starts.size(); }
    std::size_t clip_begin(std::size_t k) const { return starts.at(k); }
    std::size_t clip_end(std::size_t k) const { return k + 1 < starts.size() ? starts[k + 1] : frames; }
    std::size_t clip_length(std::size_t k) const { return clip_end(k) - clip_begin(k); }

    std::size_t clip_of(std::size_t frame) const {
        if (frame >= frames) {
            throw IndexError("frame " + std::to_string(frame) + " out of range for " + std::to_string(frames) +
                             " frames");
        }
        auto it = std::upper_bound(starts.begin(), starts.end(), frame);
        return static_cast<std::size_t>(it - starts.begin()) - 1;
    }

    void validate() const {
        if (frames == 0 || starts.empty() || starts.front() != 0) {
            throw DataError("partition must cover at least one frame and start at frame 0");
        }
        for (std::size_t k = 0; k < starts.size(); ++k) {
            if (starts[k] >= frames || (k > 0 && starts[k] <= starts[k - 1])) {
                throw DataError("partition starts must be strictly increasing and below " + std::to_string(frames));
            }
        }
    }

    friend bool operator==(const ClipPartition&, const ClipPartition&) = default;
};

namespace detail {

// Window origins along one axis: 0, step, 2*step, ... with the final placement clamped so the
// window ends at the grid edge. Windows wider than the axis collapse to one full-axis window.
inline std::vector<std::size_t> window_origins(std::size_t length, std::size_t window, std::size_t step) {
    if (window >= length) {
        return {0};
    }
    std::vector<std::size_t> origins;
    std::size_t pos = 0;
    for (; pos + window <= length; pos += step) {
        origins.push_back(pos);
    }
    if (origins.back() + window < length) {
        origins.push_back(length - window);
    }
    return origins;
}

}  // namespace detail

/// True iff every window x window placement over `heatmap` has mean >= threshold.
inline bool window_check(const Heatmap& heatmap, std::size_t window, std::size_t step, double threshold) {
    const std::size_t h = heatmap.height;
    const std::size_t w = heatmap.width;
    if (h == 0 || w == 0 || heatmap.values.size() != h * w) {
        throw DimensionError("window_check needs a non-empty heatmap");
    }
    if (window == 0 || step == 0) {
        throw ConfigError("window and step must be >= 1");
    }
    // summed-area table, (h+1) x (w+1)
    std::vector<double> sat((h + 1) * (w + 1), 0.0);
    for (std::size_t r = 0; r < h; ++r) {
        double row_sum = 0.0;
        for (std::size_t c = 0; c < w; ++c) {
            row_sum += heatmap.at(r, c);
            sat[(r + 1) * (w + 1) + c + 1] = sat[r * (w + 1) + c + 1] + row_sum;
        }
    }
    const std::size_t wh = std::min(window, h);
    const std::size_t ww = std::min(window, w);
    const double area = static_cast<double>(wh * ww);
    for (std::size_t r0 : detail::window_origins(h, window, step)) {
        for (std::size_t c0 : detail::window_origins(w, window, step)) {
            const std::size_t r1 = r0 + wh;
            const std::size_t c1 = c0 + ww;
            const double sum = sat[r1 * (w + 1) + c1] - sat[r0 * (w + 1) + c1] - sat[r1 * (w + 1) + c0] +
                               sat[r0 * (w + 1) + c0];
            if (sum / area < threshold) {
                return false;
            }
        }
    }
    return true;
}

/// Groups consecutive frames into clips of similar content. Clip start i is compared with
/// frames j = i+1, i+2, ... until a heatmap H(i, j) fails the mean or the window test; the
/// boundary rule then decides where the next clip starts. The trailing clip start is always
/// appended so that every frame belongs to exactly one clip.
inline ClipPartition adaptive_partition(const PartitionParams& params, HeatmapCache& cache) {
    params.validate();
    const std::size_t n = cache.features().frames();
    std::vector<std::size_t> starts;
    std::size_t i = 0;
    std::size_t j = 1;
    while (j < n) {
        const auto h = cache.lookup(i, j);
        const bool similar =
            h->mean() >= params.mean_threshold &&
            window_check(*h, params.window, params.step, params.window_threshold);
        if (similar) {
            ++j;
            continue;
        }
        starts.push_back(i);
        i = params.boundary == BoundaryRule::literal ? j + 1 : j;
        j = i + 1;
    }
    starts.push_back(i);

    ClipPartition out{n, {}};
    for (std::size_t s : starts) {
        if (s < n && (out.starts.empty() || s > out.starts.back())) {
            out.starts.push_back(s);
        }
    }
    if (out.starts.empty() || out.starts.front() != 0) {
        out.starts.insert(out.starts.begin(), 0);
    }
    return out;
}

inline ClipPartition adaptive_partition(const FeatureVolume& features, const PartitionParams& params) {
    HeatmapCache cache(features, 4);
    return adaptive_partition(params, cache);
}

/// y-t diagnostic: the centre column of each frame stitched left to right.
struct YtDiagnostic {
    Tensor plot;                           ///< h x n x c
    std::vector<std::size_t> boundaries;   ///< clip starts other than frame 0
};

/// `frames` is n x h x w x c (features or pixels); column floor(w/2) of every frame is used.
inline YtDiagnostic yt_diagnostic(const Tensor& frames, const ClipPartition& partition) {
    if (frames.rank() != 4) {
        throw DimensionError("yt_diagnostic needs n x h x w x c frames, got " + shape_to_string(frames.shape()));
    }
    const std::size_t n = frames.dim(0);
    const std::size_t h = frames.dim(1);
    const std::size_t w = frames.dim(2);
    const std::size_t c = frames.dim(3);
    if (partition.frames != n) {
        throw DimensionError("partition covers " + std::to_string(partition.frames) + " frames, volume has " +
                             std::to_string(n));
    }
    const std::size_t col = w / 2;
    YtDiagnostic out{Tensor({h, n, c}), {}};
    for (std::size_t f = 0; f < n; ++f) {
        for (std::size_t r = 0; r < h; ++r) {
            const std::size_t src = ((f * h + r) * w + col) * c;
            const std::size_t dst = (r * n + f) * c;
            std::copy_n(frames.data().begin() + static_cast<std::ptrdiff_t>(src), c,
                        out.plot.data().begin() + static_cast<std::ptrdiff_t>(dst));
        }
    }
    out.boundaries.assign(partition.starts.begin() + (partition.starts.empty() ? 0 : 1), partition.starts.end());
    return out;
}

}  // namespace adaflow
