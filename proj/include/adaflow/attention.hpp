// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "adaflow/error.hpp"
#include "adaflow/heatmap_cache.hpp"
#include "adaflow/tensor.hpp"

namespace adaflow {

/// Query/key/value projections, each d_model x (heads * d_head). Heads are contiguous
/// column blocks of width d_head.
struct ProjectionWeights {
    Tensor query;
    Tensor key;
    Tensor value;
    std::size_t heads = 1;

    std::size_t model_dim() const { return query.dim(0); }
    std::size_t inner_dim() const { return query.dim(1); }
    std::size_t head_dim() const { return inner_dim() / heads; }

    void validate() const {
        if (query.rank() != 2 || key.shape() != query.shape() || value.shape() != query.shape()) {
            throw DimensionError("projection weights must share one d_model x inner shape");
        }
        if (heads == 0 || inner_dim() % heads != 0) {
            throw DimensionError("inner dimension " + std::to_string(inner_dim()) + " is not divisible by " +
                                 std::to_string(heads) + " heads");
        }
    }

    static ProjectionWeights identity(std::size_t d_model) {
        Tensor eye({d_model, d_model});
        for (std::size_t i = 0; i < d_model; ++i) {
            eye[i * d_model + i] = 1.0f;
        }
        return {eye, eye, eye, 1};
    }
};

/// A key/value token: keyframe ordinal (0-based position in the keyframe list) and flat grid position.
struct KvToken {
    std::uint32_t ordinal = 0;
    std::uint32_t position = 0;

    friend auto operator<=>(const KvToken&, const KvToken&) = default;
};

/// Key/value tokens retained for one query keyframe, ordered by (ordinal, position).
struct TokenSelection {
    std::size_t query_ordinal = 0;
    std::size_t frame_count = 0;  ///< M, keyframes in the joint edit
    std::size_t height = 0;       ///< grid the positions refer to
    std::size_t width = 0;
    std::size_t budget = 0;       ///< maximum retained tokens
    std::vector<KvToken> kept;

    std::size_t tokens_per_frame() const noexcept { return height * width; }

    /// Every token of every keyframe, in order.
    static TokenSelection all(std::size_t query_ordinal, std::size_t frame_count, std::size_t h, std::size_t w) {
        TokenSelection s{query_ordinal, frame_count, h, w, frame_count * h * w, {}};
        s.kept.reserve(frame_count * h * w);
        for (std::size_t k = 0; k < frame_count; ++k) {
            for (std::size_t p = 0; p < h * w; ++p) {
                s.kept.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(p)});
            }
        }
        return s;
    }
};

/// Optional instrumentation for one attention call.
struct AttentionProbe {
    /// Receives each normalised softmax row (head, weights over the gathered keys).
    std::function<void(std::size_t, std::span<const double>)> softmax_row;
    /// Largest gathered K/V buffer, in token rows, across calls observed by this probe.
    std::size_t peak_kv_rows = 0;
    /// Sum of gathered K/V rows across calls.
    std::uint64_t kv_rows_gathered = 0;
};

/// Keys and values of all M keyframes, (M * tokens) x inner, in f64.
struct ProjectedKeysValues {
    std::size_t frames = 0;
    std::size_t tokens = 0;
    std::size_t inner = 0;
    std::vector<double> keys;
    std::vector<double> values;
};

namespace detail {

struct LatentShape {
    std::size_t frames;
    std::size_t tokens;
    std::size_t model;
};

// Latents are M x (any spatial axes) x d_model.
inline LatentShape latent_shape(const Tensor& latents, const ProjectionWeights& w) {
    if (latents.rank() < 3) {
        throw DimensionError("latents must be M x tokens x d_model, got " + shape_to_string(latents.shape()));
    }
    w.validate();
    const std::size_t model = latents.shape().back();
    if (model != w.model_dim()) {
        throw DimensionError("latent channels " + std::to_string(model) + " do not match projection input " +
                             std::to_string(w.model_dim()));
    }
    return {latents.dim(0), latents.stride(0) / model, model};
}

// rows x model (f32) times model x inner (f32), accumulated and returned in f64.
inline std::vector<double> project_rows(std::span<const float> rows, std::size_t count, std::size_t model,
                                        const Tensor& weight) {
    const std::size_t inner = weight.dim(1);
    std::vector<double> out(count * inner, 0.0);
    const auto wdata = weight.data();
    for (std::size_t r = 0; r < count; ++r) {
        double* dst = out.data() + r * inner;
        for (std::size_t m = 0; m < model; ++m) {
            const double x = rows[r * model + m];
            const float* wrow = wdata.data() + m * inner;
            for (std::size_t c = 0; c < inner; ++c) {
                dst[c] += x * wrow[c];
            }
        }
    }
    return out;
}

}  // namespace detail

inline ProjectedKeysValues project_keys_values(const Tensor& latents, const ProjectionWeights& w) {
    const auto shape = detail::latent_shape(latents, w);
    const std::size_t rows = shape.frames * shape.tokens;
    return {shape.frames, shape.tokens, w.inner_dim(), detail::project_rows(latents.data(), rows, shape.model, w.key),
            detail::project_rows(latents.data(), rows, shape.model, w.value)};
}

inline std::vector<double> project_queries(const Tensor& latents, const ProjectionWeights& w, std::size_t frame) {
    const auto shape = detail::latent_shape(latents, w);
    if (frame >= shape.frames) {
        throw IndexError("query frame " + std::to_string(frame) + " out of range for " +
                         std::to_string(shape.frames) + " keyframes");
    }
    return detail::project_rows(latents.slice(frame), shape.tokens, shape.model, w.query);
}

/// Softmax(Q K~^T / sqrt(d_head)) V~ per head over the gathered rows `kept` (all rows when
/// `kept` is null). Row-max subtraction, f64 accumulation, f32 output of shape tokens x inner.
inline Tensor attend(std::span<const double> queries, const ProjectedKeysValues& kv, std::size_t heads,
                     const std::vector<KvToken>* kept, AttentionProbe* probe = nullptr) {
    const std::size_t inner = kv.inner;
    const std::size_t head_dim = inner / heads;
    const std::size_t q_tokens = queries.size() / inner;
    const std::size_t rows = kept ? kept->size() : kv.frames * kv.tokens;
    if (rows == 0) {
        throw DimensionError("attention needs at least one key/value token");
    }

    // Gathered K~ and V~: the KV buffer whose size the token budget bounds.
    std::vector<double> k_buf;
    std::vector<double> v_buf;
    const double* keys = kv.keys.data();
    const double* values = kv.values.data();
    if (kept) {
        k_buf.resize(rows * inner);
        v_buf.resize(rows * inner);
        for (std::size_t r = 0; r < rows; ++r) {
            const KvToken t = (*kept)[r];
            if (t.ordinal >= kv.frames || t.position >= kv.tokens) {
                throw IndexError("selected token (" + std::to_string(t.ordinal) + ", " + std::to_string(t.position) +
                                 ") out of range for " + std::to_string(kv.frames) + " x " +
                                 std::to_string(kv.tokens) + " keys");
            }
            const std::size_t src = (static_cast<std::size_t>(t.ordinal) * kv.tokens + t.position) * inner;
            std::copy_n(kv.keys.data() + src, inner, k_buf.data() + r * inner);
            std::copy_n(kv.values.data() + src, inner, v_buf.data() + r * inner);
        }
        keys = k_buf.data();
        values = v_buf.data();
    }
    if (probe) {
        probe->peak_kv_rows = std::max(probe->peak_kv_rows, rows);
        probe->kv_rows_gathered += rows;
    }

    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    Tensor out({q_tokens, inner});
    std::vector<double> logits(rows);
    std::vector<double> acc(head_dim);
    for (std::size_t p = 0; p < q_tokens; ++p) {
        for (std::size_t h = 0; h < heads; ++h) {
            const double* q = queries.data() + p * inner + h * head_dim;
            double row_max = -INFINITY;
            for (std::size_t r = 0; r < rows; ++r) {
                const double* k = keys + r * inner + h * head_dim;
                double dot = 0.0;
                for (std::size_t c = 0; c < head_dim; ++c) {
                    dot += q[c] * k[c];
                }
                logits[r] = dot * scale;
                row_max = std::max(row_max, logits[r]);
            }
            double denom = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                logits[r] = std::exp(logits[r] - row_max);
                denom += logits[r];
            }
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                const double* v = values + r * inner + h * head_dim;
                const double weight = logits[r];
                for (std::size_t c = 0; c < head_dim; ++c) {
                    acc[c] += weight * v[c];
                }
            }
            for (std::size_t c = 0; c < head_dim; ++c) {
                out[p * inner + h * head_dim + c] = static_cast<float>(acc[c] / denom);
            }
            if (probe && probe->softmax_row) {
                for (double& l : logits) {
                    l /= denom;
                }
                probe->softmax_row(h, logits);
            }
        }
    }
    return out;
}

/// Extended self-attention: the queries of keyframe `query` attend to the keys and values of
/// all M keyframes. `latents` is M x tokens x d_model; the result is tokens x (heads * d_head).
inline Tensor extended_self_attention(const Tensor& latents, const ProjectionWeights& w, std::size_t query,
                                      AttentionProbe* probe = nullptr) {
    const auto q = project_queries(latents, w, query);
    const auto kv = project_keys_values(latents, w);
    return attend(q, kv, w.heads, nullptr, probe);
}

/// Extended self-attention restricted to the key/value tokens in `selection`.
inline Tensor slimmed_attention(const Tensor& latents, const ProjectionWeights& w, std::size_t query,
                                const TokenSelection& selection, AttentionProbe* probe = nullptr) {
    if (selection.query_ordinal != query) {
        throw IndexError("selection was built for query " + std::to_string(selection.query_ordinal) + ", not " +
                         std::to_string(query));
    }
    const auto q = project_queries(latents, w, query);
    const auto kv = project_keys_values(latents, w);
    return attend(q, kv, w.heads, &selection.kept, probe);
}

/// Chooses the key/value tokens kept for query keyframe `query_ordinal`.
///
/// With M <= budget_frames every token is kept and no heatmap is computed. Otherwise token p of
/// keyframe k_j scores H(k_j, k_query)[p], the similarity of that token to its best match in
/// the query frame. The query frame's own tokens are always kept; the remaining
/// (budget_frames - 1) * tokens slots go to the highest scores across all other keyframes,
/// ties broken by lower ordinal, then lower position.
inline TokenSelection select_kv_tokens(std::size_t query_ordinal, std::span<const std::size_t> keyframes,
                                       HeatmapCache& cache, std::size_t budget_frames,
                                       std::size_t tokens_per_frame) {
    const auto& features = cache.features();
    const std::size_t frames = keyframes.size();
    if (frames == 0) {
        throw DataError("select_kv_tokens needs at least one keyframe");
    }
    if (budget_frames == 0) {
        throw ConfigError("budget_frames must be >= 1");
    }
    if (query_ordinal >= frames) {
        throw IndexError("query ordinal " + std::to_string(query_ordinal) + " out of range for " +
                         std::to_string(frames) + " keyframes");
    }
    if (tokens_per_frame != features.tokens()) {
        throw DimensionError("tokens_per_frame " + std::to_string(tokens_per_frame) +
                             " does not match the feature grid (" + std::to_string(features.tokens()) + ")");
    }
    const std::size_t h = features.height();
    const std::size_t w = features.width();
    if (frames <= budget_frames) {
        return TokenSelection::all(query_ordinal, frames, h, w);
    }

    struct Scored {
        float score;
        KvToken token;
    };
    std::vector<Scored> scored;
    scored.reserve((frames - 1) * tokens_per_frame);
    const std::size_t query_frame = keyframes[query_ordinal];
    for (std::size_t k = 0; k < frames; ++k) {
        if (k == query_ordinal) {
            continue;
        }
        const auto heat = cache.lookup(keyframes[k], query_frame);
        for (std::size_t p = 0; p < tokens_per_frame; ++p) {
            scored.push_back({heat->values[p], {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(p)}});
        }
    }
    const std::size_t extra = (budget_frames - 1) * tokens_per_frame;
    const auto ranks_before = [](const Scored& a, const Scored& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.token < b.token;
    };
    std::nth_element(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(extra), scored.end(),
                     ranks_before);

    TokenSelection s{query_ordinal, frames, h, w, budget_frames * tokens_per_frame, {}};
    s.kept.reserve(budget_frames * tokens_per_frame);
    for (std::size_t p = 0; p < tokens_per_frame; ++p) {
        s.kept.push_back({static_cast<std::uint32_t>(query_ordinal), static_cast<std::uint32_t>(p)});
    }
    for (std::size_t r = 0; r < extra; ++r) {
        s.kept.push_back(scored[r].token);
    }
    std::sort(s.kept.begin(), s.kept.end());
    return s;
}

/// Carries a selection to another grid resolution: each keyframe's keep-mask is resized with
/// nearest-neighbour sampling and re-flattened in (ordinal, position) order.
inline TokenSelection selection_mask_for_layer(const TokenSelection& selection, std::size_t layer_h,
                                               std::size_t layer_w) {
    if (layer_h == 0 || layer_w == 0) {
        throw DimensionError("layer grid must be at least 1x1");
    }
    const std::size_t h = selection.height;
    const std::size_t w = selection.width;
    if (h == layer_h && w == layer_w) {
        return selection;
    }
    std::vector<std::uint8_t> mask(selection.frame_count * h * w, 0);
    for (const KvToken& t : selection.kept) {
        if (t.ordinal >= selection.frame_count || t.position >= h * w) {
            throw IndexError("selection token out of range");
        }
        mask[t.ordinal * h * w + t.position] = 1;
    }
    std::vector<std::size_t> src_of(layer_h * layer_w);
    for (std::size_t r = 0; r < layer_h; ++r) {
        for (std::size_t c = 0; c < layer_w; ++c) {
            src_of[r * layer_w + c] = nearest_source(r, h, layer_h) * w + nearest_source(c, w, layer_w);
        }
    }
    const std::size_t per_frame_budget = selection.frame_count == 0 ? 0 : selection.budget / (h * w);
    TokenSelection out{selection.query_ordinal, selection.frame_count, layer_h, layer_w,
                       per_frame_budget * layer_h * layer_w, {}};
    for (std::size_t k = 0; k < selection.frame_count; ++k) {
        for (std::size_t p = 0; p < layer_h * layer_w; ++p) {
            if (mask[k * h * w + src_of[p]]) {
                out.kept.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(p)});
            }
        }
    }
    return out;
}

}  // namespace adaflow
