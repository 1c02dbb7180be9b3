// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

// Synthesise a two-scene video, edit it, and print the partition and cost.

#include <iostream>

#include "adaflow/adaflow.hpp"

int main() {
    adaflow::SyntheticSpec spec;
    spec.frames = 24;
    spec.scene_lengths = {16, 8};
    spec.motion = adaflow::Motion::cyclic_shift;
    spec.seed = 7;

    adaflow::PipelineConfig config;
    config.synthetic = spec;
    config.timesteps = 4;
    config.budget_frames = 1;
    config.seed = 3;

    const auto result = adaflow::run_pipeline(config);

    std::cout << "clip starts:";
    for (std::size_t s : result.partition.starts) std::cout << ' ' << s;
    std::cout << "\nkeyframes at t=0:";
    for (std::size_t f : result.schedule.at(0)) std::cout << ' ' << f;
    const auto& cost = result.costs.front();
    std::cout << "\nattention MACs: " << cost.attention_macs_slimmed << " of " << cost.attention_macs_full << " (ratio " << cost.ratio
              << ")\nconsistency: mean " << result.consistency.mean << ", min " << result.consistency.min << '\n';
}
