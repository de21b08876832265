// Copyright 2026 The seld-rt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "seld/errors.hpp"
#include "seld/pipeline.hpp"
#include "seld/version.hpp"

namespace seld {

/// Mock backend selection for runs and sweeps.
struct BackendConfig {
  std::string kind = "zeros";  // zeros | fixed-linear | scripted | delay
  std::uint64_t seed = 42;
  double delay_seconds = 0.0;
  std::size_t tracks = 3;
  std::size_t classes = 13;
  std::size_t time_pool = 2;       // input frames per output frame
  std::string script_path;         // events CSV for the scripted backend
};

struct MetricsConfig {
  double spatial_threshold_deg = 20.0;
  double frame_seconds = 0.1;
};

/// Geometry described by name so configs stay readable; custom positions are
/// also accepted.
struct GeometryConfig {
  std::string kind = "tetrahedral";  // tetrahedral | pair | ring | custom
  double d_max_m = 0.084;
  double spacing_m = 0.084;
  int ring_mics = 8;
  double ring_radius_m = 0.05;
  double speed_of_sound = 343.0;
  std::vector<std::array<double, 3>> mic_positions;

  ArrayGeometry build() const {
    if (kind == "tetrahedral") return make_tetrahedral_geometry(d_max_m, speed_of_sound);
    if (kind == "pair") return make_pair_geometry(spacing_m, speed_of_sound);
    if (kind == "ring") return make_ring_geometry(ring_mics, ring_radius_m, speed_of_sound);
    if (kind == "custom") {
      ArrayGeometry geometry;
      geometry.mic_positions = mic_positions;
      geometry.speed_of_sound = speed_of_sound;
      return geometry;
    }
    throw InvalidRange("unknown geometry kind '" + kind + "'");
  }
};

/// Full effective configuration shared by every command.
struct RunConfig {
  PipelineConfig pipeline{};
  GeometryConfig geometry{};
  BackendConfig backend{};
  MetricsConfig metrics{};

  /// Applies the geometry to the feature config; call after edits.
  void finalize() {
    pipeline.feature.geometry = geometry.build();
    pipeline.feature.format.num_channels = pipeline.feature.geometry.num_mics();
    pipeline.feature.salsa.clip_bound_m = 2.0 * pipeline.feature.geometry.max_pair_distance();
  }
};

inline nlohmann::json run_config_to_json(const RunConfig& config) {
  const FeatureConfig& feature = config.pipeline.feature;
  nlohmann::json geometry = {
      {"kind", config.geometry.kind},
      {"d_max_m", config.geometry.d_max_m},
      {"spacing_m", config.geometry.spacing_m},
      {"ring_mics", config.geometry.ring_mics},
      {"ring_radius_m", config.geometry.ring_radius_m},
      {"speed_of_sound", config.geometry.speed_of_sound},
  };
  if (!config.geometry.mic_positions.empty()) {
    nlohmann::json positions = nlohmann::json::array();
    for (const auto& p : config.geometry.mic_positions) positions.push_back({p[0], p[1], p[2]});
    geometry["mic_positions"] = positions;
  }
  return {
      {"pipeline",
       {{"block_seconds", config.pipeline.block_seconds},
        {"blocks_per_window", config.pipeline.blocks_per_window},
        {"realtime", config.pipeline.realtime}}},
      {"feature",
       {{"kind", to_string(config.pipeline.kind)},
        {"sample_rate_hz", feature.format.sample_rate_hz},
        {"num_channels", feature.format.num_channels},
        {"fft_size", feature.stft.fft_size},
        {"window_length", feature.stft.window_length},
        {"hop", feature.stft.hop},
        {"mel_bands", feature.mel_bands},
        {"mel_fmin_hz", feature.mel_fmin_hz},
        {"mel_fmax_hz", feature.mel_fmax_hz},
        {"cutoff_bins", feature.salsa.cutoff_bins},
        {"log_floor", feature.salsa.log_floor},
        {"clip_nipd", feature.salsa.clip_nipd},
        {"gcc_lags", feature.gcc_lags}}},
      {"geometry", geometry},
      {"decode",
       {{"threshold", config.pipeline.decode.threshold},
        {"merge_angle_deg", config.pipeline.decode.merge_angle_deg}}},
      {"backend",
       {{"kind", config.backend.kind},
        {"seed", config.backend.seed},
        {"delay_seconds", config.backend.delay_seconds},
        {"tracks", config.backend.tracks},
        {"classes", config.backend.classes},
        {"time_pool", config.backend.time_pool},
        {"script_path", config.backend.script_path}}},
      {"metrics",
       {{"spatial_threshold_deg", config.metrics.spatial_threshold_deg},
        {"frame_seconds", config.metrics.frame_seconds}}},
  };
}

/// Merges a (possibly partial) JSON document over `config`. A manifest
/// written by a previous run works as-is: its "config" object is used.
inline void merge_run_config_json(const nlohmann::json& doc, RunConfig& config) {
  const nlohmann::json& root = doc.contains("config") ? doc["config"] : doc;
  auto get = [](const nlohmann::json& obj, const char* key, auto& field) {
    if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
  };
  if (root.contains("pipeline")) {
    const auto& p = root["pipeline"];
    get(p, "block_seconds", config.pipeline.block_seconds);
    get(p, "blocks_per_window", config.pipeline.blocks_per_window);
    get(p, "realtime", config.pipeline.realtime);
  }
  if (root.contains("feature")) {
    const auto& f = root["feature"];
    if (f.contains("kind")) {
      config.pipeline.kind = feature_kind_from_string(f["kind"].get<std::string>());
    }
    FeatureConfig& feature = config.pipeline.feature;
    get(f, "sample_rate_hz", feature.format.sample_rate_hz);
    get(f, "num_channels", feature.format.num_channels);
    get(f, "fft_size", feature.stft.fft_size);
    get(f, "window_length", feature.stft.window_length);
    get(f, "hop", feature.stft.hop);
    get(f, "mel_bands", feature.mel_bands);
    get(f, "mel_fmin_hz", feature.mel_fmin_hz);
    get(f, "mel_fmax_hz", feature.mel_fmax_hz);
    get(f, "cutoff_bins", feature.salsa.cutoff_bins);
    get(f, "log_floor", feature.salsa.log_floor);
    get(f, "clip_nipd", feature.salsa.clip_nipd);
    get(f, "gcc_lags", feature.gcc_lags);
  }
  if (root.contains("geometry")) {
    const auto& g = root["geometry"];
    get(g, "kind", config.geometry.kind);
    get(g, "d_max_m", config.geometry.d_max_m);
    get(g, "spacing_m", config.geometry.spacing_m);
    get(g, "ring_mics", config.geometry.ring_mics);
    get(g, "ring_radius_m", config.geometry.ring_radius_m);
    get(g, "speed_of_sound", config.geometry.speed_of_sound);
    if (g.contains("mic_positions")) {
      config.geometry.mic_positions.clear();
      for (const auto& p : g["mic_positions"]) {
        config.geometry.mic_positions.push_back(
            {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
      }
    }
  }
  if (root.contains("decode")) {
    const auto& d = root["decode"];
    get(d, "threshold", config.pipeline.decode.threshold);
    get(d, "merge_angle_deg", config.pipeline.decode.merge_angle_deg);
  }
  if (root.contains("backend")) {
    const auto& b = root["backend"];
    get(b, "kind", config.backend.kind);
    get(b, "seed", config.backend.seed);
    get(b, "delay_seconds", config.backend.delay_seconds);
    get(b, "tracks", config.backend.tracks);
    get(b, "classes", config.backend.classes);
    get(b, "time_pool", config.backend.time_pool);
    get(b, "script_path", config.backend.script_path);
  }
  if (root.contains("metrics")) {
    const auto& m = root["metrics"];
    get(m, "spatial_threshold_deg", config.metrics.spatial_threshold_deg);
    get(m, "frame_seconds", config.metrics.frame_seconds);
  }
  config.finalize();
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SeldError("cannot open config " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw CsvParseError(path + ": invalid JSON: " + e.what(), 0);
  }
  RunConfig config;
  merge_run_config_json(doc, config);
  return config;
}

/// Reproducibility record written next to every output artifact.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
  RunConfig config;
};

inline nlohmann::json run_manifest_to_json(const RunManifest& manifest) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%FT%TZ", std::gmtime(&now));
  return {
      {"artifact_version", kVersion},
      {"command", manifest.command},
      {"created_utc", stamp},
      {"inputs", manifest.inputs},
      {"outputs", manifest.outputs},
      {"config", run_config_to_json(manifest.config)},
  };
}

inline void write_run_manifest(const std::string& path, const RunManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw SeldError("cannot open " + path + " for writing");
  out << run_manifest_to_json(manifest).dump(2) << '\n';
}

}  // namespace seld
