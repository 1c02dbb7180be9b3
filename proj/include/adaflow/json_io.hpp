// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// JSON forms of partitions, schedules, reports and pipeline configs, plus the correspondence
// snapshot (AFTN n x h x w of flat targets + {"keyframe_of": [...]} sidecar).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "adaflow/aftn.hpp"
#include "adaflow/cost.hpp"
#include "adaflow/error.hpp"
#include "adaflow/keyframes.hpp"
#include "adaflow/metrics.hpp"
#include "adaflow/partition.hpp"
#include "adaflow/pipeline.hpp"
#include "adaflow/propagation.hpp"
#include "adaflow/synth.hpp"

namespace adaflow {

using Json = nlohmann::ordered_json;

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw DataError("invalid JSON in '" + path.string() + "': " + e.what());
    }
}

inline void write_json_file(const Json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

namespace detail {

template <typename T, typename E = DataError>
T json_get(const Json& j, const char* key) {
    if (!j.contains(key)) {
        throw E(std::string("missing JSON field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw E(std::string("bad JSON field '") + key + "': " + e.what());
    }
}

template <typename T>
T json_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("bad config field '") + key + "': " + e.what());
    }
}

}  // namespace detail

inline Json to_json(const ClipPartition& p) { return Json{{"n", p.frames}, {"starts", p.starts}}; }

inline ClipPartition partition_from_json(const Json& j) {
    ClipPartition p{detail::json_get<std::size_t>(j, "n"), detail::json_get<std::vector<std::size_t>>(j, "starts")};
    p.validate();
    return p;
}

inline Json to_json(const KeyframeSchedule& s) { return Json{{"T", s.timesteps}, {"schedule", s.frames}}; }

inline KeyframeSchedule schedule_from_json(const Json& j) {
    KeyframeSchedule s;
    s.timesteps = detail::json_get<std::size_t>(j, "T");
    s.frames = detail::json_get<std::vector<std::vector<std::size_t>>>(j, "schedule");
    if (s.frames.size() != s.timesteps) {
        throw DataError("schedule holds " + std::to_string(s.frames.size()) + " rows for T = " +
                        std::to_string(s.timesteps));
    }
    return s;
}

inline Json to_json(const CostReport& c) {
    return Json{{"kv_tokens_full", c.kv_tokens_full},
                {"kv_tokens_slimmed", c.kv_tokens_slimmed},
                {"attention_macs_full", c.attention_macs_full},
                {"attention_macs_slimmed", c.attention_macs_slimmed},
                {"ratio", c.ratio}};
}

inline Json to_json(const ConsistencyReport& r) {
    Json clips = Json::array();
    for (const auto& c : r.clips) {
        clips.push_back({{"clip", c.clip}, {"pairs", c.pairs}, {"mean", c.mean}, {"min", c.min}});
    }
    return Json{{"mean", r.mean}, {"min", r.min}, {"pairs", r.pairs}, {"clips", clips}, {"kv_ratio", r.kv_ratio}};
}

inline Json to_json(const SyntheticVideo& v) {
    return Json{{"scene_starts", v.scene_starts},
                {"boundaries", std::vector<std::size_t>(v.scene_starts.begin() + 1, v.scene_starts.end())},
                {"permutations", v.permutations}};
}

inline SyntheticSpec synthetic_from_json(const Json& j) {
    SyntheticSpec s;
    s.frames = detail::json_or<std::size_t>(j, "n", s.frames);
    s.height = detail::json_or<std::size_t>(j, "h", s.height);
    s.width = detail::json_or<std::size_t>(j, "w", s.width);
    s.channels = detail::json_or<std::size_t>(j, "d", s.channels);
    s.scene_lengths = detail::json_or<std::vector<std::size_t>>(j, "scene_lengths", s.scene_lengths);
    s.floor = detail::json_or<double>(j, "floor", s.floor);
    s.ceiling = detail::json_or<double>(j, "ceiling", s.ceiling);
    s.motion = parse_motion(detail::json_or<std::string>(j, "motion", to_string(s.motion)));
    s.block = detail::json_or<std::size_t>(j, "block", s.block);
    s.noise = detail::json_or<double>(j, "noise", s.noise);
    s.seed = detail::json_or<std::uint64_t>(j, "seed", s.seed);
    return s;
}

inline Json to_json(const SyntheticSpec& s) {
    return Json{{"n", s.frames},         {"h", s.height},          {"w", s.width},
                {"d", s.channels},       {"scene_lengths", s.scene_lengths},
                {"floor", s.floor},      {"ceiling", s.ceiling},   {"motion", to_string(s.motion)},
                {"block", s.block},      {"noise", s.noise},       {"seed", s.seed}};
}

/// Parses a pipeline config. Unknown keys are rejected so typos do not silently fall back
/// to defaults.
inline PipelineConfig config_from_json(const Json& j) {
    if (!j.is_object()) {
        throw ConfigError("pipeline config must be a JSON object");
    }
    static const std::vector<std::string> known = {
        "features", "latents", "synthetic", "latent", "partition", "timesteps", "seed", "budget_frames",
        "fixed_keyframes", "propagation_stride", "denoiser", "threads", "heatmap_cache_capacity", "oracle",
        "output", "report", "yt", "correspondences"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown config field '" + key + "'");
        }
    }
    PipelineConfig c;
    c.features_path = detail::json_or<std::string>(j, "features", "");
    c.latents_path = detail::json_or<std::string>(j, "latents", "");
    if (j.contains("synthetic") && !j["synthetic"].is_null()) {
        c.synthetic = synthetic_from_json(j["synthetic"]);
    }
    if (j.contains("latent")) {
        const Json& l = j["latent"];
        c.latent_h = detail::json_or<std::size_t>(l, "h", c.latent_h);
        c.latent_w = detail::json_or<std::size_t>(l, "w", c.latent_w);
        c.latent_channels = detail::json_or<std::size_t>(l, "c", c.latent_channels);
    }
    if (j.contains("partition")) {
        const Json& p = j["partition"];
        c.partition.mean_threshold = detail::json_or<double>(p, "ms", c.partition.mean_threshold);
        c.partition.window_threshold = detail::json_or<double>(p, "ws", c.partition.window_threshold);
        c.partition.window = detail::json_or<std::size_t>(p, "window", c.partition.window);
        c.partition.step = detail::json_or<std::size_t>(p, "step", c.partition.step);
        c.partition.boundary = parse_boundary_rule(detail::json_or<std::string>(p, "boundary", "literal"));
    }
    c.timesteps = detail::json_or<std::size_t>(j, "timesteps", c.timesteps);
    c.seed = detail::json_or<std::uint64_t>(j, "seed", c.seed);
    c.budget_frames = detail::json_or<std::size_t>(j, "budget_frames", c.budget_frames);
    c.keyframe_mode = detail::json_or<bool>(j, "fixed_keyframes", false) ? KeyframeMode::fixed : KeyframeMode::uniform;
    c.propagation_stride = detail::json_or<std::size_t>(j, "propagation_stride", c.propagation_stride);
    if (j.contains("denoiser")) {
        const Json& d = j["denoiser"];
        c.denoiser_seed = detail::json_or<std::uint64_t>(d, "seed", c.denoiser_seed);
        if (d.contains("layers")) {
            c.layers.clear();
            for (const Json& l : d["layers"]) {
                c.layers.push_back({detail::json_or<std::size_t>(l, "h", 0), detail::json_or<std::size_t>(l, "w", 0),
                                    detail::json_or<std::size_t>(l, "d_head", 8),
                                    detail::json_or<std::size_t>(l, "heads", 1)});
            }
        }
    }
    c.threads = detail::json_or<std::size_t>(j, "threads", c.threads);
    c.heatmap_cache_capacity = detail::json_or<std::size_t>(j, "heatmap_cache_capacity", c.heatmap_cache_capacity);
    const std::string oracle = detail::json_or<std::string>(j, "oracle", "none");
    if (oracle != "none" && oracle != "full-esa") {
        throw ConfigError("oracle must be 'none' or 'full-esa'");
    }
    c.full_esa_oracle = oracle == "full-esa";
    c.output_path = detail::json_or<std::string>(j, "output", "");
    c.report_path = detail::json_or<std::string>(j, "report", "");
    c.yt_path = detail::json_or<std::string>(j, "yt", "");
    c.correspondences_path = detail::json_or<std::string>(j, "correspondences", "");
    c.validate();
    return c;
}

/// Deterministic run report (independent of the worker count).
inline Json to_json(const PipelineResult& r) {
    Json costs = Json::array();
    for (std::size_t t = 0; t < r.costs.size(); ++t) {
        Json c = to_json(r.costs[t]);
        c["t"] = t;
        costs.push_back(std::move(c));
    }
    return Json{{"partition", to_json(r.partition)},
                {"keyframes", to_json(r.schedule)},
                {"cost", costs},
                {"consistency", to_json(r.consistency)},
                {"peak_kv_rows", r.peak_kv_rows},
                {"kv_rows_gathered", r.kv_rows_gathered},
                {"correspondence_indices", r.correspondence_indices}};
}

/// phi(i, keyframe_of(i)) of every frame at one timestep.
struct CorrespondenceSnapshot {
    std::vector<std::size_t> keyframe_of;
    std::vector<PositionMap> maps;
};

inline CorrespondenceSnapshot snapshot_correspondences(const CorrespondenceSet& set, const ClipPartition& partition,
                                                       const KeyframeSchedule& schedule, std::size_t t) {
    CorrespondenceSnapshot snap;
    for (std::size_t i = 0; i < partition.frames; ++i) {
        const std::size_t j = keyframe_of(i, t, partition, schedule);
        snap.keyframe_of.push_back(j);
        snap.maps.push_back(i == j ? PositionMap::identity(set.height(), set.width()) : set.map(i, j));
    }
    return snap;
}

/// Targets are stored as floats, exact below 2^24 tokens per frame.
inline void write_correspondence_snapshot(const CorrespondenceSnapshot& snap, const std::filesystem::path& tensor_path,
                                          const std::filesystem::path& sidecar_path) {
    if (snap.maps.empty()) {
        throw DataError("empty correspondence snapshot");
    }
    const std::size_t h = snap.maps.front().height;
    const std::size_t w = snap.maps.front().width;
    if (h * w >= (std::size_t{1} << 24)) {
        throw DataError("token grid too large for float-encoded indices");
    }
    Tensor t({snap.maps.size(), h, w});
    for (std::size_t i = 0; i < snap.maps.size(); ++i) {
        for (std::size_t p = 0; p < h * w; ++p) {
            t[i * h * w + p] = static_cast<float>(snap.maps[i].targets[p]);
        }
    }
    tensor_write(t, tensor_path);
    write_json_file(Json{{"keyframe_of", snap.keyframe_of}}, sidecar_path);
}

inline CorrespondenceSnapshot read_correspondence_snapshot(const std::filesystem::path& tensor_path,
                                                           const std::filesystem::path& sidecar_path) {
    const Tensor t = tensor_read(tensor_path);
    if (t.rank() != 3) {
        throw DataError("correspondence tensor must be n x h x w");
    }
    CorrespondenceSnapshot snap;
    snap.keyframe_of = detail::json_get<std::vector<std::size_t>>(read_json_file(sidecar_path), "keyframe_of");
    if (snap.keyframe_of.size() != t.dim(0)) {
        throw DataError("sidecar lists " + std::to_string(snap.keyframe_of.size()) + " frames, tensor holds " +
                        std::to_string(t.dim(0)));
    }
    const std::size_t h = t.dim(1);
    const std::size_t w = t.dim(2);
    for (std::size_t i = 0; i < t.dim(0); ++i) {
        PositionMap m{h, w, std::vector<std::int32_t>(h * w)};
        for (std::size_t p = 0; p < h * w; ++p) {
            const float v = t[i * h * w + p];
            if (!(v >= 0.0f) || v >= static_cast<float>(h * w) || v != std::floor(v)) {
                throw DataError("correspondence target out of range in frame " + std::to_string(i));
            }
            m.targets[p] = static_cast<std::int32_t>(v);
        }
        snap.maps.push_back(std::move(m));
    }
    return snap;
}

}  // namespace adaflow
