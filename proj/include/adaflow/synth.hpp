// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "adaflow/error.hpp"
#include "adaflow/similarity.hpp"
#include "adaflow/splitmix.hpp"
#include "adaflow/tensor.hpp"

namespace adaflow {

enum class Motion {
    identity,           ///< every frame of a scene shows the scene's base grid
    cyclic_shift,       ///< local frame l shows the base grid shifted right by l columns (wrapping)
    block_permutation,  ///< local frame l > 0 shows the base grid's blocks in a random order
};

inline Motion parse_motion(const std::string& s) {
    if (s == "identity") return Motion::identity;
    if (s == "shift" || s == "cyclic_shift") return Motion::cyclic_shift;
    if (s == "block" || s == "block_permutation") return Motion::block_permutation;
    throw ConfigError("motion must be identity, shift or block, got '" + s + "'");
}

inline std::string to_string(Motion m) {
    switch (m) {
        case Motion::identity: return "identity";
        case Motion::cyclic_shift: return "shift";
        case Motion::block_permutation: return "block";
    }
    return "identity";
}

struct SyntheticSpec {
    std::size_t frames = 20;
    std::size_t height = 8;
    std::size_t width = 8;
    std::size_t channels = 64;
    std::vector<std::size_t> scene_lengths = {10, 10};
    double floor = 0.9;    ///< lower bound on every within-scene heatmap cell
    double ceiling = 0.2;  ///< upper bound on any cross-scene token similarity
    Motion motion = Motion::identity;
    std::size_t block = 2;  ///< block side for block_permutation
    double noise = 1.0;     ///< fraction of the largest per-token noise the floor admits
    std::uint64_t seed = 0;

    void validate() const {
        if (scene_lengths.empty() || std::accumulate(scene_lengths.begin(), scene_lengths.end(), std::size_t{0}) != frames) {
            throw ConfigError("scene lengths must be non-empty and sum to the frame count");
        }
        for (std::size_t len : scene_lengths) {
            if (len == 0) {
                throw ConfigError("scene lengths must be >= 1");
            }
        }
        if (height == 0 || width == 0) {
            throw ConfigError("synthetic grid must be at least 1x1");
        }
        if (!(floor > ceiling) || floor > 1.0 || ceiling < 0.0) {
            throw ConfigError("synthetic spec needs 0 <= ceiling < floor <= 1");
        }
        if (noise < 0.0 || noise > 1.0) {
            throw ConfigError("noise fraction must lie in [0, 1]");
        }
        if (scene_channels() < 2) {
            throw ConfigError("infeasible synthetic spec: " + std::to_string(channels) + " channels cannot hold " +
                              std::to_string(scene_lengths.size()) + " separable scenes");
        }
        if (motion == Motion::block_permutation && (block == 0 || height % block != 0 || width % block != 0)) {
            throw ConfigError("block permutation needs the grid to be divisible by the block side");
        }
    }

    /// Channels shared by all scenes (carry the bounded cross-scene similarity).
    std::size_t shared_channels() const {
        return ceiling > 0.0 ? std::max<std::size_t>(1, channels / (scene_lengths.size() + 1)) : 0;
    }
    /// Channels private to each scene.
    std::size_t scene_channels() const {
        const std::size_t shared = shared_channels();
        return shared >= channels ? 0 : (channels - shared) / scene_lengths.size();
    }
};

/// Synthetic feature volume plus its exact construction.
struct SyntheticVideo {
    FeatureVolume features;
    std::vector<std::size_t> scene_starts;
    /// permutations[f][p]: base-grid token displayed at position p of frame f.
    std::vector<std::vector<std::int32_t>> permutations;

    std::size_t scene_of(std::size_t frame) const {
        std::size_t s = 0;
        while (s + 1 < scene_starts.size() && scene_starts[s + 1] <= frame) {
            ++s;
        }
        return s;
    }

    /// True correspondence from frame i into frame j of the same scene.
    PositionMap truth(std::size_t i, std::size_t j) const {
        const auto& pi = permutations.at(i);
        const auto& pj = permutations.at(j);
        std::vector<std::int32_t> inverse_j(pj.size());
        for (std::size_t q = 0; q < pj.size(); ++q) {
            inverse_j[static_cast<std::size_t>(pj[q])] = static_cast<std::int32_t>(q);
        }
        PositionMap m{features.height(), features.width(), std::vector<std::int32_t>(pi.size())};
        for (std::size_t p = 0; p < pi.size(); ++p) {
            m.targets[p] = inverse_j[static_cast<std::size_t>(pi[p])];
        }
        return m;
    }
};

namespace detail {

inline void random_unit(SplitMix64& rng, std::span<double> v) {
    double norm = 0.0;
    do {
        norm = 0.0;
        for (double& x : v) {
            x = rng.normal();
            norm += x * x;
        }
    } while (norm < 1e-20);
    norm = std::sqrt(norm);
    for (double& x : v) {
        x /= norm;
    }
}

inline std::vector<std::int32_t> motion_permutation(const SyntheticSpec& spec, std::size_t scene, std::size_t local) {
    const std::size_t h = spec.height;
    const std::size_t w = spec.width;
    std::vector<std::int32_t> perm(h * w);
    std::iota(perm.begin(), perm.end(), 0);
    if (local == 0 || spec.motion == Motion::identity) {
        return perm;
    }
    if (spec.motion == Motion::cyclic_shift) {
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t c = 0; c < w; ++c) {
                perm[r * w + c] = static_cast<std::int32_t>(r * w + (c + w - local % w) % w);
            }
        }
        return perm;
    }
    const std::size_t b = spec.block;
    const std::size_t bh = h / b;
    const std::size_t bw = w / b;
    std::vector<std::size_t> order(bh * bw);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(keyed_word(spec.seed, 0xb10c, (scene << 32) | local));
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    for (std::size_t blk = 0; blk < order.size(); ++blk) {
        const std::size_t src = order[blk];
        for (std::size_t dr = 0; dr < b; ++dr) {
            for (std::size_t dc = 0; dc < b; ++dc) {
                const std::size_t pos = ((blk / bw) * b + dr) * w + (blk % bw) * b + dc;
                const std::size_t base = ((src / bw) * b + dr) * w + (src % bw) * b + dc;
                perm[pos] = static_cast<std::int32_t>(base);
            }
        }
    }
    return perm;
}

}  // namespace detail

/// Builds a multi-scene feature volume with known clip boundaries and token motion.
///
/// Base token of scene s at position p is u = a*g + b*e with g a unit vector in the shared
/// channel block, e a unit vector in scene s's private block, a^2 = ceiling, b^2 = 1 - a^2.
/// Cross-scene similarity is therefore at most a^2. Each displayed token adds noise inside the
/// private block, orthogonal to e, of norm at most tan(acos(floor)/2), so any two noisy copies
/// of one base token have cosine >= floor.
inline SyntheticVideo synth_video(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t n = spec.frames;
    const std::size_t tokens = spec.height * spec.width;
    const std::size_t d = spec.channels;
    const std::size_t scenes = spec.scene_lengths.size();
    const std::size_t shared = spec.shared_channels();
    const std::size_t own = spec.scene_channels();
    const double a = std::sqrt(spec.ceiling);
    const double b = std::sqrt(1.0 - spec.ceiling);
    const double max_noise = std::tan(std::acos(spec.floor) / 2.0) * spec.noise;

    // base[s][p] (d values) and the private unit vector e[s][p] (own values)
    std::vector<std::vector<double>> base(scenes, std::vector<double>(tokens * d, 0.0));
    std::vector<std::vector<double>> own_dir(scenes, std::vector<double>(tokens * own, 0.0));
    for (std::size_t s = 0; s < scenes; ++s) {
        SplitMix64 rng(keyed_word(spec.seed, 0xba5e, s));
        std::vector<double> g(shared);
        for (std::size_t p = 0; p < tokens; ++p) {
            std::span<double> e(own_dir[s].data() + p * own, own);
            detail::random_unit(rng, e);
            if (shared > 0) {
                detail::random_unit(rng, g);
            }
            double* u = base[s].data() + p * d;
            for (std::size_t k = 0; k < shared; ++k) {
                u[k] = a * g[k];
            }
            for (std::size_t k = 0; k < own; ++k) {
                u[shared + s * own + k] = (shared > 0 ? b : 1.0) * e[k];
            }
        }
    }

    SyntheticVideo video;
    video.permutations.resize(n);
    Tensor values({n, spec.height, spec.width, d});
    std::vector<double> noise(own);
    std::size_t frame = 0;
    for (std::size_t s = 0; s < scenes; ++s) {
        video.scene_starts.push_back(frame);
        for (std::size_t local = 0; local < spec.scene_lengths[s]; ++local, ++frame) {
            auto perm = detail::motion_permutation(spec, s, local);
            SplitMix64 rng(keyed_word(spec.seed, 0x401e, frame));
            for (std::size_t p = 0; p < tokens; ++p) {
                const std::size_t src = static_cast<std::size_t>(perm[p]);
                const double* u = base[s].data() + src * d;
                float* dst = values.data().data() + (frame * tokens + p) * d;
                for (std::size_t k = 0; k < d; ++k) {
                    dst[k] = static_cast<float>(u[k]);
                }
                if (max_noise <= 0.0) {
                    continue;
                }
                // random direction in the private block, orthogonal to e
                const double* e = own_dir[s].data() + src * own;
                double norm = 0.0;
                do {
                    detail::random_unit(rng, noise);
                    double dot = 0.0;
                    for (std::size_t k = 0; k < own; ++k) {
                        dot += noise[k] * e[k];
                    }
                    norm = 0.0;
                    for (std::size_t k = 0; k < own; ++k) {
                        noise[k] -= dot * e[k];
                        norm += noise[k] * noise[k];
                    }
                    norm = std::sqrt(norm);
                } while (norm < 1e-6);
                // float rounding of the stored token must not push the pair below the floor
                const double magnitude = max_noise * 0.999 * rng.uniform();
                for (std::size_t k = 0; k < own; ++k) {
                    dst[shared + s * own + k] += static_cast<float>(magnitude * noise[k] / norm);
                }
            }
            video.permutations[frame] = std::move(perm);
        }
    }
    video.features = FeatureVolume(std::move(values));
    return video;
}

/// Latents coherent with the features: each frame's features resized to lat_h x lat_w and
/// projected onto `channels` by a fixed random matrix scaled by 1/sqrt(d).
inline Tensor synth_latents(const FeatureVolume& features, std::size_t lat_h, std::size_t lat_w,
                            std::size_t channels, std::uint64_t seed) {
    if (lat_h == 0 || lat_w == 0 || channels == 0) {
        throw ConfigError("latent grid and channels must be >= 1");
    }
    const std::size_t d = features.channels();
    std::vector<float> proj(d * channels);
    SplitMix64 rng(keyed_word(seed, 0x1a7e, 0));
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (float& x : proj) {
        x = static_cast<float>(rng.normal() * scale);
    }
    const std::size_t n = features.frames();
    Tensor out({n, lat_h, lat_w, channels});
    for (std::size_t f = 0; f < n; ++f) {
        const Tensor grid = resize_nearest(frame_tensor(features, f), lat_h, lat_w);
        auto dst = out.slice(f);
        for (std::size_t p = 0; p < lat_h * lat_w; ++p) {
            for (std::size_t c = 0; c < channels; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    acc += static_cast<double>(grid[p * d + k]) * proj[k * channels + c];
                }
                dst[p * channels + c] = static_cast<float>(acc);
            }
        }
    }
    return out;
}

}  // namespace adaflow
