// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

// adaflow command-line tool. Exit codes: 0 success, 2 config error, 3 data error.

#include <cstdint>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "adaflow/adaflow.hpp"
#include "adaflow/json_io.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

using adaflow::Json;

struct SynthArgs {
    adaflow::SyntheticSpec spec;
    std::string motion = "identity";
    std::string out;
    std::string truth;
    std::string latents;
    std::size_t latent_h = 0;
    std::size_t latent_w = 0;
    std::size_t latent_c = 8;
};

void run_synth(SynthArgs& a) {
    a.spec.motion = adaflow::parse_motion(a.motion);
    const auto video = adaflow::synth_video(a.spec);
    adaflow::tensor_write(video.features.tensor(), a.out);
    if (!a.truth.empty()) {
        adaflow::write_json_file(adaflow::to_json(video), a.truth);
    }
    if (!a.latents.empty()) {
        const std::size_t lh = a.latent_h ? a.latent_h : a.spec.height;
        const std::size_t lw = a.latent_w ? a.latent_w : a.spec.width;
        adaflow::tensor_write(adaflow::synth_latents(video.features, lh, lw, a.latent_c, a.spec.seed), a.latents);
    }
}

struct PartitionArgs {
    std::string features;
    adaflow::PartitionParams params;
    std::string boundary = "literal";
    std::string out;
};

void run_partition(PartitionArgs& a) {
    a.params.boundary = adaflow::parse_boundary_rule(a.boundary);
    a.params.validate();
    const adaflow::FeatureVolume features(adaflow::tensor_read(a.features));
    const auto partition = adaflow::adaptive_partition(features, a.params);
    adaflow::write_json_file(adaflow::to_json(partition), a.out);
}

struct KeyframeArgs {
    std::string partition;
    std::size_t timesteps = 50;
    std::uint64_t seed = 0;
    bool fixed = false;
    std::string out;
};

void run_keyframes(const KeyframeArgs& a) {
    const auto partition = adaflow::partition_from_json(adaflow::read_json_file(a.partition));
    const auto schedule = adaflow::select_keyframes(partition, a.timesteps, a.seed,
                                                    a.fixed ? adaflow::KeyframeMode::fixed
                                                            : adaflow::KeyframeMode::uniform);
    adaflow::write_json_file(adaflow::to_json(schedule), a.out);
}

struct SlimArgs {
    std::string features;
    std::string keyframes;
    std::size_t budget_frames = 14;
    std::size_t head_dim = 64;
    std::size_t heads = 1;
    std::string report;
};

void run_slim(const SlimArgs& a) {
    const adaflow::FeatureVolume features(adaflow::tensor_read(a.features));
    const auto schedule = adaflow::schedule_from_json(adaflow::read_json_file(a.keyframes));
    adaflow::HeatmapCache cache(features);
    Json steps = Json::array();
    for (std::size_t t = 0; t < schedule.timesteps; ++t) {
        const auto& row = schedule.frames[t];
        for (std::size_t f : row) {
            if (f >= features.frames()) {
                throw adaflow::DataError("keyframe " + std::to_string(f) + " at timestep " + std::to_string(t) +
                                         " is outside the feature volume");
            }
        }
        std::vector<std::size_t> kept;
        for (std::size_t k = 0; k < row.size(); ++k) {
            kept.push_back(adaflow::select_kv_tokens(k, row, cache, a.budget_frames, features.tokens()).kept.size());
        }
        Json step = adaflow::to_json(
            adaflow::attention_cost(row.size(), features.tokens(), a.budget_frames, a.head_dim, a.heads));
        step["t"] = t;
        step["kept_per_query"] = kept;
        steps.push_back(std::move(step));
    }
    adaflow::write_json_file(Json{{"budget_frames", a.budget_frames}, {"timesteps", steps}}, a.report);
}

struct RunArgs {
    std::string config;
    std::string oracle;
    std::size_t threads = 0;
    std::string out;
    std::string report;
};

void run_run(const RunArgs& a) {
    Json j = adaflow::read_json_file(a.config);
    if (!a.oracle.empty()) j["oracle"] = a.oracle;
    if (a.threads) j["threads"] = a.threads;
    if (!a.out.empty()) j["output"] = a.out;
    if (!a.report.empty()) j["report"] = a.report;
    const auto config = adaflow::config_from_json(j);
    const auto inputs = adaflow::load_inputs(config);
    const auto result = adaflow::run_pipeline(inputs, config);
    if (!config.output_path.empty()) {
        adaflow::tensor_write(result.edited, config.output_path);
    }
    if (!config.report_path.empty()) {
        adaflow::write_json_file(adaflow::to_json(result), config.report_path);
    }
    if (!config.yt_path.empty()) {
        const auto yt = adaflow::yt_diagnostic(result.edited, result.partition);
        adaflow::tensor_write(yt.plot, config.yt_path);
        adaflow::write_json_file(Json{{"boundaries", yt.boundaries}}, config.yt_path + ".json");
    }
    if (!config.correspondences_path.empty()) {
        const auto snap = adaflow::snapshot_correspondences(result.correspondences, result.partition,
                                                            result.schedule, config.timesteps - 1);
        adaflow::write_correspondence_snapshot(snap, config.correspondences_path,
                                               config.correspondences_path + ".json");
    }
    std::cout << "frames " << result.partition.frames << ", clips " << result.partition.clip_count()
              << ", consistency " << result.consistency.mean << ", kv ratio " << result.consistency.kv_ratio
              << '\n';
}

struct MetricsArgs {
    std::string edited;
    std::string features;
    std::string partition;
    std::string keyframes;
    std::string out;
};

void run_metrics(const MetricsArgs& a) {
    const adaflow::Tensor edited = adaflow::tensor_read(a.edited);
    const adaflow::FeatureVolume features(adaflow::tensor_read(a.features));
    const auto partition = adaflow::partition_from_json(adaflow::read_json_file(a.partition));
    const auto schedule = adaflow::schedule_from_json(adaflow::read_json_file(a.keyframes));
    const auto corr = adaflow::precompute_correspondences(features, partition, schedule);
    const auto report = adaflow::consistency_metrics(edited, corr, partition);
    adaflow::write_json_file(adaflow::to_json(report), a.out);
}

struct YtArgs {
    std::string frames;
    std::string partition;
    std::string out;
    std::string boundaries;
};

void run_yt(const YtArgs& a) {
    const auto frames = adaflow::tensor_read(a.frames);
    const auto partition = adaflow::partition_from_json(adaflow::read_json_file(a.partition));
    const auto yt = adaflow::yt_diagnostic(frames, partition);
    adaflow::tensor_write(yt.plot, a.out);
    if (!a.boundaries.empty()) {
        adaflow::write_json_file(Json{{"boundaries", yt.boundaries}}, a.boundaries);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaflow: adaptive partitioning, KV-slimmed attention and latent propagation for long videos"};
    app.require_subcommand(1);
    std::function<void()> action;

    SynthArgs synth;
    auto* cmd = app.add_subcommand("synth", "Write a synthetic multi-scene feature volume");
    cmd->set_help_flag("--help", "Print this help message and exit");
    cmd->add_option("--n", synth.spec.frames, "Frame count")->required();
    cmd->add_option("--h", synth.spec.height, "Token grid height");
    cmd->add_option("--w", synth.spec.width, "Token grid width");
    cmd->add_option("--d", synth.spec.channels, "Feature channels");
    auto* scenes = cmd->add_option("--scenes", synth.spec.scene_lengths, "Scene lengths, comma separated (default: one scene)")
                       ->delimiter(',');
    cmd->add_option("--floor", synth.spec.floor, "Within-scene similarity floor");
    cmd->add_option("--ceiling", synth.spec.ceiling, "Cross-scene similarity ceiling");
    cmd->add_option("--motion", synth.motion, "identity | shift | block");
    cmd->add_option("--block", synth.spec.block, "Block side for block motion");
    cmd->add_option("--noise", synth.spec.noise, "Noise as a fraction of the admissible maximum");
    cmd->add_option("--seed", synth.spec.seed, "Seed");
    cmd->add_option("--out", synth.out, "Feature volume (AFTN)")->required();
    cmd->add_option("--truth", synth.truth, "Ground-truth JSON");
    cmd->add_option("--latents", synth.latents, "Also write latents (AFTN)");
    cmd->add_option("--latent-h", synth.latent_h, "Latent grid height (default: feature grid)");
    cmd->add_option("--latent-w", synth.latent_w, "Latent grid width (default: feature grid)");
    cmd->add_option("--latent-c", synth.latent_c, "Latent channels");
    cmd->callback([&] {
        if (scenes->count() == 0) {
            synth.spec.scene_lengths = {synth.spec.frames};
        }
        action = [&] { run_synth(synth); };
    });

    PartitionArgs part;
    cmd = app.add_subcommand("partition", "Split a feature volume into clips");
    cmd->add_option("--features", part.features, "Feature volume (AFTN)")->required();
    cmd->add_option("--ms", part.params.mean_threshold, "Mean threshold");
    cmd->add_option("--ws", part.params.window_threshold, "Window threshold");
    cmd->add_option("--window", part.params.window, "Window side in heatmap cells");
    cmd->add_option("--step", part.params.step, "Window step in heatmap cells");
    cmd->add_option("--boundary", part.boundary, "literal | strict");
    cmd->add_option("--out", part.out, "Partition JSON")->required();
    cmd->callback([&] { action = [&] { run_partition(part); }; });

    KeyframeArgs keys;
    cmd = app.add_subcommand("keyframes", "Sample one keyframe per clip per timestep");
    cmd->add_option("--partition", keys.partition, "Partition JSON")->required();
    cmd->add_option("--timesteps", keys.timesteps, "Timestep count");
    cmd->add_option("--seed", keys.seed, "Seed");
    cmd->add_flag("--fixed-keyframes", keys.fixed, "Always use the first frame of each clip");
    cmd->add_option("--out", keys.out, "Schedule JSON")->required();
    cmd->callback([&] { action = [&] { run_keyframes(keys); }; });

    SlimArgs slim;
    cmd = app.add_subcommand("slim", "Report KV token selection and attention cost per timestep");
    cmd->add_option("--features", slim.features, "Feature volume (AFTN)")->required();
    cmd->add_option("--keyframes", slim.keyframes, "Schedule JSON")->required();
    cmd->add_option("--budget-frames", slim.budget_frames, "KV budget in frames");
    cmd->add_option("--d-head", slim.head_dim, "Head dimension for MAC counts");
    cmd->add_option("--heads", slim.heads, "Head count for MAC counts");
    cmd->add_option("--report", slim.report, "Report JSON")->required();
    cmd->callback([&] { action = [&] { run_slim(slim); }; });

    RunArgs run;
    cmd = app.add_subcommand("run", "Run the full pipeline from a JSON config");
    cmd->add_option("--config", run.config, "Pipeline config JSON")->required();
    cmd->add_option("--oracle", run.oracle, "full-esa: brute-force extended self-attention, no slimming");
    cmd->add_option("--threads", run.threads, "Worker threads");
    cmd->add_option("--out", run.out, "Edited latents (AFTN), overrides the config");
    cmd->add_option("--report", run.report, "Report JSON, overrides the config");
    cmd->callback([&] { action = [&] { run_run(run); }; });

    MetricsArgs metrics;
    cmd = app.add_subcommand("metrics", "Temporal consistency of an edited volume");
    cmd->add_option("--edited", metrics.edited, "Edited volume (AFTN)")->required();
    cmd->add_option("--features", metrics.features, "Source feature volume (AFTN)")->required();
    cmd->add_option("--partition", metrics.partition, "Partition JSON")->required();
    cmd->add_option("--keyframes", metrics.keyframes, "Schedule JSON")->required();
    cmd->add_option("--out", metrics.out, "Report JSON")->required();
    cmd->callback([&] { action = [&] { run_metrics(metrics); }; });

    YtArgs yt;
    cmd = app.add_subcommand("yt", "Stitch the centre column of every frame into a y-t plot");
    cmd->add_option("--frames", yt.frames, "n x h x w x c volume (AFTN)")->required();
    cmd->add_option("--partition", yt.partition, "Partition JSON")->required();
    cmd->add_option("--out", yt.out, "Plot, h x n x c (AFTN)")->required();
    cmd->add_option("--boundaries", yt.boundaries, "Boundary JSON");
    cmd->callback([&] { action = [&] { run_yt(yt); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        action();
    } catch (const adaflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const adaflow::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
