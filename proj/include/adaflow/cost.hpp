// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>

#include "adaflow/error.hpp"

namespace adaflow {

/// Key/value length and multiply-accumulate counts of one attention layer at one timestep,
/// where each of the M keyframes issues tokens_per_frame queries.
struct CostReport {
    std::uint64_t kv_tokens_full = 0;
    std::uint64_t kv_tokens_slimmed = 0;
    std::uint64_t attention_macs_full = 0;
    std::uint64_t attention_macs_slimmed = 0;
    double ratio = 1.0;  ///< kv_tokens_slimmed / kv_tokens_full

    CostReport& operator+=(const CostReport& other) {
        kv_tokens_full += other.kv_tokens_full;
        kv_tokens_slimmed += other.kv_tokens_slimmed;
        attention_macs_full += other.attention_macs_full;
        attention_macs_slimmed += other.attention_macs_slimmed;
        ratio = kv_tokens_full == 0 ? 1.0
                                    : static_cast<double>(kv_tokens_slimmed) / static_cast<double>(kv_tokens_full);
        return *this;
    }

    friend bool operator==(const CostReport&, const CostReport&) = default;
};

/// MACs = queries x kv x d_head x heads x 2 (logits plus the weighted value sum),
/// queries = M x tokens_per_frame, kv = min(M, budget) x tokens_per_frame when slimmed.
inline CostReport attention_cost(std::uint64_t keyframes, std::uint64_t tokens_per_frame, std::uint64_t budget_frames,
                                 std::uint64_t head_dim, std::uint64_t heads) {
    if (keyframes == 0 || tokens_per_frame == 0 || budget_frames == 0 || head_dim == 0 || heads == 0) {
        throw ConfigError("attention_cost: all counts must be >= 1");
    }
    CostReport r;
    const std::uint64_t queries = keyframes * tokens_per_frame;
    r.kv_tokens_full = keyframes * tokens_per_frame;
    r.kv_tokens_slimmed = std::min(keyframes, budget_frames) * tokens_per_frame;
    r.attention_macs_full = queries * r.kv_tokens_full * head_dim * heads * 2;
    r.attention_macs_slimmed = queries * r.kv_tokens_slimmed * head_dim * heads * 2;
    r.ratio = static_cast<double>(r.kv_tokens_slimmed) / static_cast<double>(r.kv_tokens_full);
    return r;
}

}  // namespace adaflow
