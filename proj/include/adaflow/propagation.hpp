// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "adaflow/error.hpp"
#include "adaflow/keyframes.hpp"
#include "adaflow/parallel.hpp"
#include "adaflow/partition.hpp"
#include "adaflow/similarity.hpp"
#include "adaflow/tensor.hpp"

namespace adaflow {

/// Token correspondences phi(i, j) from frame i into frame j, both inside one clip. Built once
/// from source features and read-only afterwards.
class CorrespondenceSet {
public:
    CorrespondenceSet() = default;
    CorrespondenceSet(std::size_t frames, std::size_t height, std::size_t width)
        : m_height(height), m_width(width), m_maps(frames) {}

    std::size_t frames() const noexcept { return m_maps.size(); }
    std::size_t height() const noexcept { return m_height; }
    std::size_t width() const noexcept { return m_width; }

    void insert(std::size_t i, std::size_t j, PositionMap map) {
        auto& row = m_maps.at(i);
        auto it = std::lower_bound(row.begin(), row.end(), j, [](const auto& e, std::size_t key) { return e.first < key; });
        if (it != row.end() && it->first == j) {
            it->second = std::move(map);
        } else {
            row.emplace(it, j, std::move(map));
        }
    }

    bool contains(std::size_t i, std::size_t j) const { return find(i, j) != nullptr; }

    const PositionMap& map(std::size_t i, std::size_t j) const {
        if (const PositionMap* m = find(i, j)) {
            return *m;
        }
        throw IndexError("no correspondence stored from frame " + std::to_string(i) + " to frame " +
                         std::to_string(j));
    }

    std::size_t pair_count() const {
        std::size_t c = 0;
        for (const auto& row : m_maps) {
            c += row.size();
        }
        return c;
    }

    /// Stored position indices, the memory footprint in entries.
    std::size_t index_count() const { return pair_count() * m_height * m_width; }

    friend bool operator==(const CorrespondenceSet&, const CorrespondenceSet&) = default;

private:
    const PositionMap* find(std::size_t i, std::size_t j) const {
        if (i >= m_maps.size()) {
            return nullptr;
        }
        const auto& row = m_maps[i];
        auto it = std::lower_bound(row.begin(), row.end(), j, [](const auto& e, std::size_t key) { return e.first < key; });
        return (it != row.end() && it->first == j) ? &it->second : nullptr;
    }

    std::size_t m_height = 0;
    std::size_t m_width = 0;
    std::vector<std::vector<std::pair<std::size_t, PositionMap>>> m_maps;
};

/// Keyframe serving frame `i` at timestep `t`.
inline std::size_t keyframe_of(std::size_t i, std::size_t t, const ClipPartition& partition,
                               const KeyframeSchedule& schedule) {
    return schedule.at(t).at(partition.clip_of(i));
}

/// Computes phi(i, j) for every frame i and every frame j of the same clip that is a keyframe
/// at some timestep. With `adjacent`, phi(i, i-1) is also stored for consecutive frames of a
/// clip (consumed by consistency_metrics). A frame paired with itself maps to the identity.
inline CorrespondenceSet precompute_correspondences(const FeatureVolume& features, const ClipPartition& partition,
                                                    const KeyframeSchedule& schedule, std::size_t threads = 1,
                                                    bool adjacent = true) {
    partition.validate();
    if (partition.frames != features.frames()) {
        throw DimensionError("partition covers " + std::to_string(partition.frames) + " frames, features hold " +
                             std::to_string(features.frames()));
    }
    for (const auto& row : schedule.frames) {
        if (row.size() != partition.clip_count()) {
            throw DimensionError("schedule rows must hold one keyframe per clip");
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t k = 0; k < partition.clip_count(); ++k) {
        std::set<std::size_t> candidates;
        for (const auto& row : schedule.frames) {
            candidates.insert(row[k]);
        }
        for (std::size_t i = partition.clip_begin(k); i < partition.clip_end(k); ++i) {
            for (std::size_t j : candidates) {
                pairs.emplace_back(i, j);
            }
            if (adjacent && i > partition.clip_begin(k) && !candidates.contains(i - 1)) {
                pairs.emplace_back(i, i - 1);
            }
        }
    }
    const std::size_t h = features.height();
    const std::size_t w = features.width();
    std::vector<PositionMap> maps(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t idx) {
        const auto [i, j] = pairs[idx];
        maps[idx] = i == j ? PositionMap::identity(h, w) : correspondence_map(features, i, j);
    });
    CorrespondenceSet set(features.frames(), h, w);
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
        set.insert(pairs[idx].first, pairs[idx].second, std::move(maps[idx]));
    }
    return set;
}

namespace detail {

// Cells of the target axis whose nearest source is `cell`: [ceil(cell*out/in), ceil((cell+1)*out/in)).
inline std::pair<std::size_t, std::size_t> covered_range(std::size_t cell, std::size_t in_len, std::size_t out_len) {
    return {(cell * out_len + in_len - 1) / in_len, ((cell + 1) * out_len + in_len - 1) / in_len};
}

inline std::size_t rescale_axis(std::size_t out_cell, std::size_t target_cell, std::size_t in_len,
                                std::size_t out_len) {
    const std::size_t src = nearest_source(out_cell, in_len, out_len);
    const std::size_t offset = out_cell - covered_range(src, in_len, out_len).first;
    const auto [lo, hi] = covered_range(target_cell, in_len, out_len);
    if (hi > lo) {
        return std::min(lo + offset, hi - 1);
    }
    return std::min(target_cell * out_len / in_len, out_len - 1);
}

}  // namespace detail

/// Carries a position map to an out_h x out_w grid. Cell (r, c) reads the source map at its
/// nearest source cell and the target position is rescaled to the new grid, keeping the
/// cell's offset inside its upsampled block (so the identity stays the identity).
inline PositionMap resize_position_map(const PositionMap& map, std::size_t out_h, std::size_t out_w) {
    if (out_h == 0 || out_w == 0) {
        throw DimensionError("position map target must be at least 1x1");
    }
    const std::size_t h = map.height;
    const std::size_t w = map.width;
    if (h == out_h && w == out_w) {
        return map;
    }
    PositionMap out{out_h, out_w, std::vector<std::int32_t>(out_h * out_w)};
    for (std::size_t r = 0; r < out_h; ++r) {
        const std::size_t sr = nearest_source(r, h, out_h);
        for (std::size_t c = 0; c < out_w; ++c) {
            const std::size_t sc = nearest_source(c, w, out_w);
            const auto target = GridIndex::from_flat(static_cast<std::size_t>(map.targets[sr * w + sc]), w);
            const std::size_t tr = detail::rescale_axis(r, target.row, h, out_h);
            const std::size_t tc = detail::rescale_axis(c, target.col, w, out_w);
            out.targets[r * out_w + c] = static_cast<std::int32_t>(tr * out_w + tc);
        }
    }
    return out;
}

/// Gathers `source` (h' x w' x c) through `map` (already at h' x w') into `dst`.
inline void gather_tokens(std::span<const float> source, const PositionMap& map, std::size_t channels,
                          std::span<float> dst) {
    for (std::size_t p = 0; p < map.size(); ++p) {
        const std::size_t q = static_cast<std::size_t>(map.targets[p]);
        std::memcpy(dst.data() + p * channels, source.data() + q * channels, channels * sizeof(float));
    }
}

/// Fills every frame from its clip's keyframe output at timestep `t`: keyframes copy their own
/// output, other frames gather A_j[phi(i, j)(p)]. `keyframe_outputs` maps keyframe index to an
/// h' x w' x c tensor; phi is rescaled when h' x w' differs from the feature grid.
inline Tensor propagate(const std::map<std::size_t, Tensor>& keyframe_outputs, const CorrespondenceSet& correspondences,
                        std::size_t t, const ClipPartition& partition, const KeyframeSchedule& schedule,
                        std::size_t threads = 1) {
    const auto& row = schedule.at(t);
    if (row.size() != partition.clip_count()) {
        throw DimensionError("schedule row does not match the partition's clip count");
    }
    const Tensor* first = nullptr;
    for (std::size_t k = 0; k < row.size(); ++k) {
        auto it = keyframe_outputs.find(row[k]);
        if (it == keyframe_outputs.end()) {
            throw DataError("missing keyframe output at timestep " + std::to_string(t) + ", clip " +
                            std::to_string(k) + " (keyframe " + std::to_string(row[k]) + ")");
        }
        if (it->second.rank() != 3 || (first && it->second.shape() != first->shape())) {
            throw DimensionError("keyframe outputs must share one h' x w' x c shape");
        }
        first = first ? first : &it->second;
    }
    const std::size_t lh = first->dim(0);
    const std::size_t lw = first->dim(1);
    const std::size_t ch = first->dim(2);
    Tensor out({partition.frames, lh, lw, ch});
    parallel_for(partition.frames, threads, [&](std::size_t i) {
        const std::size_t j = row[partition.clip_of(i)];
        const Tensor& src = keyframe_outputs.at(j);
        auto dst = out.slice(i);
        if (i == j) {
            std::copy(src.data().begin(), src.data().end(), dst.begin());
            return;
        }
        gather_tokens(src.data(), resize_position_map(correspondences.map(i, j), lh, lw), ch, dst);
    });
    return out;
}

}  // namespace adaflow
