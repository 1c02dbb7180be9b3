// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adaflow/aftn.hpp"
#include "adaflow/attention.hpp"
#include "adaflow/cost.hpp"
#include "adaflow/denoiser.hpp"
#include "adaflow/error.hpp"
#include "adaflow/heatmap_cache.hpp"
#include "adaflow/keyframes.hpp"
#include "adaflow/metrics.hpp"
#include "adaflow/parallel.hpp"
#include "adaflow/partition.hpp"
#include "adaflow/propagation.hpp"
#include "adaflow/synth.hpp"

namespace adaflow {

struct PipelineConfig {
    PartitionParams partition;
    std::size_t timesteps = 50;
    std::uint64_t seed = 0;
    std::size_t budget_frames = 14;
    KeyframeMode keyframe_mode = KeyframeMode::uniform;
    std::size_t propagation_stride = 1;  ///< propagate to non-keyframes every n-th timestep

    std::vector<LayerSpec> layers = {LayerSpec{0, 0, 8, 1}};  ///< 0 x 0 grid = the latent grid
    std::uint64_t denoiser_seed = 0;

    /// Latent grid when latents are synthesised; 0 = the feature grid.
    std::size_t latent_h = 0;
    std::size_t latent_w = 0;
    std::size_t latent_channels = 8;

    std::optional<SyntheticSpec> synthetic;
    std::string features_path;
    std::string latents_path;

    std::string output_path;
    std::string report_path;
    std::string yt_path;
    std::string correspondences_path;

    std::size_t threads = 1;
    std::size_t heatmap_cache_capacity = HeatmapCache::kDefaultCapacity;
    bool full_esa_oracle = false;  ///< brute-force extended self-attention, no slimming

    void validate() const {
        partition.validate();
        if (timesteps == 0) throw ConfigError("timesteps must be >= 1");
        if (budget_frames == 0) throw ConfigError("budget_frames must be >= 1");
        if (propagation_stride == 0) throw ConfigError("propagation_stride must be >= 1");
        if (!synthetic && features_path.empty()) {
            throw ConfigError("config needs either a features path or a synthetic spec");
        }
        if (synthetic) synthetic->validate();
        for (const auto& l : layers) {
            if (l.head_dim == 0 || l.heads == 0) throw ConfigError("layer head_dim and heads must be >= 1");
        }
    }
};

struct PipelineInputs {
    FeatureVolume features;
    Tensor latents;  ///< n x lat_h x lat_w x c
};

struct PipelineResult {
    Tensor edited;  ///< n x lat_h x lat_w x c
    ClipPartition partition;
    KeyframeSchedule schedule;
    std::vector<CostReport> costs;  ///< one per timestep, summed over layers
    ConsistencyReport consistency;
    std::size_t peak_kv_rows = 0;  ///< largest gathered K/V buffer of any attention call
    std::uint64_t kv_rows_gathered = 0;
    std::size_t correspondence_indices = 0;
    std::size_t heatmaps_computed = 0;
    CorrespondenceSet correspondences;
};

namespace detail {

// Runs `fn`, prefixing any library error with the stage and coordinates. Config errors keep
// their category; everything else surfaces as a DataError.
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError("stage '" + stage + "': " + e.what());
    } catch (const Error& e) {
        throw DataError("stage '" + stage + "': " + e.what());
    }
}

inline Tensor normalise_latents(Tensor latents, std::size_t frames) {
    // inverted trajectories (T x n x tokens x c) start from their last entry
    if (latents.rank() == 4 && latents.dim(1) == frames && latents.dim(0) != frames) {
        const std::size_t t = latents.dim(0) - 1;
        const std::size_t tokens = latents.dim(2);
        const std::size_t c = latents.dim(3);
        const auto s = latents.slice(t);
        const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(tokens))));
        if (side * side != tokens) {
            throw DimensionError("trajectory latents need a square token grid to recover h x w");
        }
        return Tensor({frames, side, side, c}, std::vector<float>(s.begin(), s.end()));
    }
    if (latents.rank() != 4 || latents.dim(0) != frames) {
        throw DimensionError("latents must be n x h x w x c with n = " + std::to_string(frames) + ", got " +
                             shape_to_string(latents.shape()));
    }
    return latents;
}

}  // namespace detail

/// Reads or synthesises features and latents as configured.
inline PipelineInputs load_inputs(const PipelineConfig& config) {
    config.validate();
    PipelineInputs in;
    in.features = detail::run_stage("load", [&] {
        return config.synthetic ? synth_video(*config.synthetic).features
                                : FeatureVolume(tensor_read(config.features_path));
    });
    in.latents = detail::run_stage("load", [&] {
        if (!config.latents_path.empty()) {
            return detail::normalise_latents(tensor_read(config.latents_path), in.features.frames());
        }
        const std::size_t lh = config.latent_h ? config.latent_h : in.features.height();
        const std::size_t lw = config.latent_w ? config.latent_w : in.features.width();
        return synth_latents(in.features, lh, lw, config.latent_channels, config.seed);
    });
    return in;
}

/// Full editing loop: partition -> keyframe schedule -> one-shot correspondences -> per
/// timestep (token selection, layer-wise keyframe attention, propagation, mixing) -> metrics.
inline PipelineResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& config) {
    config.validate();
    const FeatureVolume& features = inputs.features;
    const std::size_t n = features.frames();
    const std::size_t threads = config.threads;
    PipelineResult result;

    const Tensor latents = detail::run_stage("load", [&] { return detail::normalise_latents(inputs.latents, n); });
    const std::size_t lat_h = latents.dim(1);
    const std::size_t lat_w = latents.dim(2);
    const std::size_t channels = latents.dim(3);

    std::vector<LayerSpec> layer_specs = config.layers;
    for (auto& l : layer_specs) {
        if (l.height == 0 || l.width == 0) {
            l.height = lat_h;
            l.width = lat_w;
        }
    }
    const StubDenoiser denoiser = detail::run_stage(
        "denoiser", [&] { return StubDenoiser::build(layer_specs, lat_h, lat_w, channels, config.denoiser_seed); });

    HeatmapCache cache(features, config.heatmap_cache_capacity);
    result.partition = detail::run_stage("partition", [&] { return adaptive_partition(config.partition, cache); });
    result.schedule = detail::run_stage("keyframes", [&] {
        return select_keyframes(result.partition, config.timesteps, config.seed, config.keyframe_mode);
    });
    result.correspondences = detail::run_stage("correspondences", [&] {
        return precompute_correspondences(features, result.partition, result.schedule, threads);
    });
    result.correspondence_indices = result.correspondences.index_count();

    Tensor z = latents;
    const std::size_t frames = result.partition.clip_count();
    const std::size_t dift_tokens = features.tokens();
    for (std::size_t t = 0; t < config.timesteps; ++t) {
        const std::string where = " at timestep " + std::to_string(t);
        const auto& row = result.schedule.at(t);

        std::vector<TokenSelection> selections(frames);
        if (!config.full_esa_oracle) {
            detail::run_stage("selection" + where, [&] {
                parallel_for(frames, threads, [&](std::size_t k) {
                    selections[k] = select_kv_tokens(k, row, cache, config.budget_frames, dift_tokens);
                });
            });
        }

        CostReport cost;
        const std::size_t budget = config.full_esa_oracle ? frames : config.budget_frames;
        for (const auto& layer : denoiser.layers()) {
            cost += attention_cost(frames, layer.spec.height * layer.spec.width, budget, layer.spec.head_dim,
                                   layer.spec.heads);
        }
        result.costs.push_back(cost);

        const bool propagate_now = t % config.propagation_stride == 0;
        for (std::size_t l = 0; l < denoiser.layers().size(); ++l) {
            const DenoiserLayer& layer = denoiser.layers()[l];
            const std::string at = where + ", layer " + std::to_string(l);

            Tensor keyframe_latents({frames, lat_h, lat_w, channels});
            for (std::size_t k = 0; k < frames; ++k) {
                const auto src = z.slice(row[k]);
                std::copy(src.begin(), src.end(), keyframe_latents.slice(k).begin());
            }
            std::vector<AttentionProbe> probes(frames);
            const auto outputs = detail::run_stage("attention" + at, [&] {
                return attend_keyframes(layer, keyframe_latents, config.full_esa_oracle ? nullptr : &selections,
                                        threads, probes);
            });
            for (const auto& p : probes) {
                result.peak_kv_rows = std::max(result.peak_kv_rows, p.peak_kv_rows);
                result.kv_rows_gathered += p.kv_rows_gathered;
            }

            if (!propagate_now) {
                for (std::size_t k = 0; k < frames; ++k) {
                    mix_frame(layer, z.slice(row[k]), lat_h, lat_w, outputs[k]);
                }
                continue;
            }
            std::map<std::size_t, Tensor> by_frame;
            for (std::size_t k = 0; k < frames; ++k) {
                by_frame.emplace(row[k], outputs[k]);
            }
            const Tensor propagated = detail::run_stage("propagation" + at, [&] {
                return propagate(by_frame, result.correspondences, t, result.partition, result.schedule, threads);
            });
            const Shape frame_shape{layer.spec.height, layer.spec.width, layer.projection.inner_dim()};
            parallel_for(n, threads, [&](std::size_t i) {
                const auto a = propagated.slice(i);
                mix_frame(layer, z.slice(i), lat_h, lat_w, Tensor(frame_shape, std::vector<float>(a.begin(), a.end())));
            });
        }
    }

    result.consistency = detail::run_stage(
        "metrics", [&] { return consistency_metrics(z, result.correspondences, result.partition); });
    CostReport total;
    for (const auto& c : result.costs) {
        total += c;
    }
    result.consistency.kv_ratio = total.ratio;
    result.heatmaps_computed = cache.computations();
    result.edited = std::move(z);
    return result;
}

inline PipelineResult run_pipeline(const PipelineConfig& config) { return run_pipeline(load_inputs(config), config); }

}  // namespace adaflow
