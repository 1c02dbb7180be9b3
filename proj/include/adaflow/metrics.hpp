// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <vector>

#include "adaflow/error.hpp"
#include "adaflow/partition.hpp"
#include "adaflow/propagation.hpp"
#include "adaflow/similarity.hpp"
#include "adaflow/tensor.hpp"

namespace adaflow {

struct ClipConsistency {
    std::size_t clip = 0;
    std::size_t pairs = 0;
    double mean = 1.0;
    double min = 1.0;
};

/// Feature-space temporal consistency of an edited volume. Each adjacent frame pair (i-1, i) of
/// a clip contributes the mean cosine similarity between token p of frame i and its matched
/// token phi(i, i-1)(p) of frame i-1. Clips without pairs report 1.0.
struct ConsistencyReport {
    double mean = 1.0;  ///< mean over all pairs
    double min = 1.0;   ///< worst pair
    std::size_t pairs = 0;
    std::vector<ClipConsistency> clips;
    double kv_ratio = 1.0;  ///< slimmed / full KV tokens summed over the run
};

/// `edited` is n x H x W x c; correspondences are rescaled to H x W.
inline ConsistencyReport consistency_metrics(const Tensor& edited, const CorrespondenceSet& correspondences,
                                             const ClipPartition& partition) {
    if (edited.rank() != 4 || edited.dim(0) != partition.frames) {
        throw DimensionError("edited volume must be n x H x W x c with n = " + std::to_string(partition.frames));
    }
    const std::size_t oh = edited.dim(1);
    const std::size_t ow = edited.dim(2);
    const std::size_t ch = edited.dim(3);
    ConsistencyReport report;
    double total = 0.0;
    for (std::size_t k = 0; k < partition.clip_count(); ++k) {
        ClipConsistency clip{k, 0, 1.0, 1.0};
        double clip_total = 0.0;
        for (std::size_t i = partition.clip_begin(k) + 1; i < partition.clip_end(k); ++i) {
            const PositionMap phi = resize_position_map(correspondences.map(i, i - 1), oh, ow);
            const auto cur = edited.slice(i);
            const auto prev = edited.slice(i - 1);
            double pair_sum = 0.0;
            for (std::size_t p = 0; p < phi.size(); ++p) {
                const std::size_t q = static_cast<std::size_t>(phi.targets[p]);
                pair_sum += cosine_similarity(cur.subspan(p * ch, ch), prev.subspan(q * ch, ch));
            }
            const double pair_mean = pair_sum / static_cast<double>(phi.size());
            clip.min = clip.pairs == 0 ? pair_mean : std::min(clip.min, pair_mean);
            report.min = report.pairs == 0 ? pair_mean : std::min(report.min, pair_mean);
            clip_total += pair_mean;
            total += pair_mean;
            ++clip.pairs;
            ++report.pairs;
        }
        if (clip.pairs > 0) {
            clip.mean = clip_total / static_cast<double>(clip.pairs);
        }
        report.clips.push_back(clip);
    }
    if (report.pairs > 0) {
        report.mean = total / static_cast<double>(report.pairs);
    }
    return report;
}

}  // namespace adaflow
