// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adaflow/error.hpp"
#include "adaflow/partition.hpp"
#include "adaflow/splitmix.hpp"

namespace adaflow {

enum class KeyframeMode {
    uniform,  ///< counter-based uniform draw per (timestep, clip)
    fixed,    ///< always the clip's first frame
};

/// One keyframe per clip per timestep: frames[t][k] lies in clip k.
struct KeyframeSchedule {
    std::size_t timesteps = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::size_t>> frames;

    const std::vector<std::size_t>& at(std::size_t t) const {
        if (t >= frames.size()) {
            throw IndexError("timestep " + std::to_string(t) + " out of range for " +
                             std::to_string(frames.size()) + " timesteps");
        }
        return frames[t];
    }

    friend bool operator==(const KeyframeSchedule&, const KeyframeSchedule&) = default;
};

/// Offset of the keyframe inside a clip of `clip_length` frames at (timestep, clip).
///
/// word   = mix(mix(mix(seed) ^ timestep) ^ clip),  mix = SplitMix64 finalizer of (x + 0x9e3779b97f4a7c15)
/// offset = (word * clip_length) >> 64
inline std::size_t keyframe_offset(std::uint64_t seed, std::size_t timestep, std::size_t clip,
                                   std::size_t clip_length) {
    return static_cast<std::size_t>(bounded_reduce(keyed_word(seed, timestep, clip), clip_length));
}

inline KeyframeSchedule select_keyframes(const ClipPartition& partition, std::size_t timesteps, std::uint64_t seed,
                                         KeyframeMode mode = KeyframeMode::uniform) {
    if (partition.starts.empty()) {
        throw DataError("cannot select keyframes from an empty partition");
    }
    if (timesteps == 0) {
        throw ConfigError("timestep count must be >= 1");
    }
    partition.validate();
    KeyframeSchedule schedule{timesteps, seed, {}};
    schedule.frames.resize(timesteps);
    for (std::size_t t = 0; t < timesteps; ++t) {
        auto& row = schedule.frames[t];
        row.resize(partition.clip_count());
        for (std::size_t k = 0; k < partition.clip_count(); ++k) {
            const std::size_t offset =
                mode == KeyframeMode::fixed ? 0 : keyframe_offset(seed, t, k, partition.clip_length(k));
            row[k] = partition.clip_begin(k) + offset;
        }
    }
    return schedule;
}

}  // namespace adaflow
