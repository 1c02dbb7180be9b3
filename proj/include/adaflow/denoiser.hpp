// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Deterministic stand-in for a diffusion denoiser. Each layer does project -> attend -> mix:
// keyframe latents are resized to the layer grid, attended jointly (full or slimmed extended
// self-attention), and the attention output A is folded back as z += resize(A) W_out + b.
// A real model plugs in at the same three hooks.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adaflow/attention.hpp"
#include "adaflow/error.hpp"
#include "adaflow/parallel.hpp"
#include "adaflow/splitmix.hpp"
#include "adaflow/tensor.hpp"

namespace adaflow {

struct LayerSpec {
    std::size_t height = 0;  ///< attention grid of this layer
    std::size_t width = 0;
    std::size_t head_dim = 8;
    std::size_t heads = 1;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct DenoiserLayer {
    LayerSpec spec;
    ProjectionWeights projection;
    Tensor out_weight;  ///< inner x channels
    std::vector<float> out_bias;
};

class StubDenoiser {
public:
    StubDenoiser() = default;

    /// Weights are drawn from SplitMix64 streams keyed by (seed, layer).
    static StubDenoiser build(const std::vector<LayerSpec>& specs, std::size_t latent_h, std::size_t latent_w,
                              std::size_t channels, std::uint64_t seed) {
        if (latent_h == 0 || latent_w == 0 || channels == 0) {
            throw ConfigError("latent grid and channels must be >= 1");
        }
        StubDenoiser d;
        d.m_latent_h = latent_h;
        d.m_latent_w = latent_w;
        d.m_channels = channels;
        for (std::size_t l = 0; l < specs.size(); ++l) {
            const LayerSpec& s = specs[l];
            if (s.height == 0 || s.width == 0 || s.head_dim == 0 || s.heads == 0) {
                throw ConfigError("layer " + std::to_string(l) + ": grid, head_dim and heads must be >= 1");
            }
            const std::size_t inner = s.head_dim * s.heads;
            SplitMix64 rng(keyed_word(seed, 0x1a7e5, l));
            auto random = [&](Shape shape, double scale) {
                Tensor t(std::move(shape));
                for (float& x : t.data()) {
                    x = static_cast<float>(rng.normal() * scale);
                }
                return t;
            };
            const double in_scale = 1.0 / std::sqrt(static_cast<double>(channels));
            DenoiserLayer layer;
            layer.spec = s;
            layer.projection = {random({channels, inner}, in_scale), random({channels, inner}, in_scale),
                                random({channels, inner}, in_scale), s.heads};
            layer.out_weight = random({inner, channels}, 0.1 / std::sqrt(static_cast<double>(inner)));
            layer.out_bias.resize(channels);
            for (float& b : layer.out_bias) {
                b = static_cast<float>(0.01 * rng.normal());
            }
            d.m_layers.push_back(std::move(layer));
        }
        return d;
    }

    const std::vector<DenoiserLayer>& layers() const noexcept { return m_layers; }
    std::size_t latent_h() const noexcept { return m_latent_h; }
    std::size_t latent_w() const noexcept { return m_latent_w; }
    std::size_t channels() const noexcept { return m_channels; }

    void check_latents(const Tensor& latents) const {
        if (latents.rank() != 4 || latents.dim(1) != m_latent_h || latents.dim(2) != m_latent_w ||
            latents.dim(3) != m_channels) {
            throw DimensionError("latents " + shape_to_string(latents.shape()) + " do not match the denoiser (" +
                                 std::to_string(m_latent_h) + "x" + std::to_string(m_latent_w) + "x" +
                                 std::to_string(m_channels) + ")");
        }
    }

private:
    std::vector<DenoiserLayer> m_layers;
    std::size_t m_latent_h = 0;
    std::size_t m_latent_w = 0;
    std::size_t m_channels = 0;
};

/// Attention outputs (h' x w' x inner) of every keyframe for one layer. `keyframe_latents` is
/// M x lat_h x lat_w x c. `selections` holds one selection per keyframe at any grid (resized to
/// the layer grid); nullopt runs full extended self-attention. `probes`, when non-empty, holds
/// one probe per keyframe.
inline std::vector<Tensor> attend_keyframes(const DenoiserLayer& layer, const Tensor& keyframe_latents,
                                            const std::vector<TokenSelection>* selections, std::size_t threads = 1,
                                            std::span<AttentionProbe> probes = {}) {
    const std::size_t frames = keyframe_latents.dim(0);
    const std::size_t lh = layer.spec.height;
    const std::size_t lw = layer.spec.width;
    const std::size_t channels = keyframe_latents.dim(3);
    if (selections && selections->size() != frames) {
        throw DimensionError("need one token selection per keyframe");
    }
    Tensor inputs({frames, lh, lw, channels});
    for (std::size_t k = 0; k < frames; ++k) {
        Tensor frame({keyframe_latents.dim(1), keyframe_latents.dim(2), channels},
                     std::vector<float>(keyframe_latents.slice(k).begin(), keyframe_latents.slice(k).end()));
        const Tensor resized = resize_nearest(frame, lh, lw);
        std::copy(resized.data().begin(), resized.data().end(), inputs.slice(k).begin());
    }
    const auto kv = project_keys_values(inputs, layer.projection);
    const std::size_t inner = layer.projection.inner_dim();
    std::vector<Tensor> outputs(frames);
    parallel_for(frames, threads, [&](std::size_t k) {
        const auto q = project_queries(inputs, layer.projection, k);
        AttentionProbe* probe = probes.empty() ? nullptr : &probes[k];
        Tensor a;
        if (selections) {
            const TokenSelection layer_sel = selection_mask_for_layer((*selections)[k], lh, lw);
            if (layer_sel.query_ordinal != k) {
                throw IndexError("selection " + std::to_string(k) + " was built for query " +
                                 std::to_string(layer_sel.query_ordinal));
            }
            a = attend(q, kv, layer.projection.heads, &layer_sel.kept, probe);
        } else {
            a = attend(q, kv, layer.projection.heads, nullptr, probe);
        }
        outputs[k] = Tensor({lh, lw, inner}, std::move(a.values()));
    });
    return outputs;
}

/// z += resize(A) W_out + b for one frame (lat_h x lat_w x c, updated in place).
inline void mix_frame(const DenoiserLayer& layer, std::span<float> latent, std::size_t latent_h, std::size_t latent_w,
                      const Tensor& attention) {
    const Tensor a = resize_nearest(attention, latent_h, latent_w);
    const std::size_t inner = a.dim(2);
    const std::size_t channels = layer.out_bias.size();
    const auto w = layer.out_weight.data();
    std::vector<double> acc(channels);
    for (std::size_t p = 0; p < latent_h * latent_w; ++p) {
        for (std::size_t c = 0; c < channels; ++c) {
            acc[c] = layer.out_bias[c];
        }
        for (std::size_t i = 0; i < inner; ++i) {
            const double x = a[p * inner + i];
            for (std::size_t c = 0; c < channels; ++c) {
                acc[c] += x * w[i * channels + c];
            }
        }
        for (std::size_t c = 0; c < channels; ++c) {
            latent[p * channels + c] = static_cast<float>(latent[p * channels + c] + acc[c]);
        }
    }
}

/// Runs every layer over the keyframe latents only and returns the updated keyframe latents.
/// `selections` as in attend_keyframes (nullopt = full extended self-attention).
inline Tensor stub_denoiser(const Tensor& keyframe_latents, const StubDenoiser& denoiser,
                            const std::vector<TokenSelection>* selections, std::size_t threads = 1) {
    denoiser.check_latents(keyframe_latents);
    Tensor z = keyframe_latents;
    for (const auto& layer : denoiser.layers()) {
        const auto outputs = attend_keyframes(layer, z, selections, threads);
        for (std::size_t k = 0; k < z.dim(0); ++k) {
            mix_frame(layer, z.slice(k), denoiser.latent_h(), denoiser.latent_w(), outputs[k]);
        }
    }
    return z;
}

}  // namespace adaflow
