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

// Command-line front end: feature extraction, streaming runs, latency
// profiling, scoring and scene synthesis.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or parse error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seld/seld.hpp"

namespace {

using namespace seld;

struct CommonFlags {
  std::optional<std::string> config_path;
  bool print_config = false;

  std::optional<std::string> kind;
  std::optional<double> block_seconds;
  std::optional<int> blocks_per_window;
  std::optional<int> sample_rate_hz;
  std::optional<int> mel_bands;
  std::optional<int> cutoff_bins;
  std::optional<double> threshold;
  std::optional<double> merge_angle_deg;
  std::optional<std::string> geometry_kind;
  std::optional<double> d_max_m;
  std::optional<double> spacing_m;
  std::optional<std::string> backend_kind;
  std::optional<std::uint64_t> seed;
  std::optional<double> delay_seconds;
  std::optional<std::string> script_path;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file (defaults < file < flags)");
  cmd->add_flag("--print-config", flags.print_config,
                "print the effective config as JSON and exit");
  cmd->add_option("--kind", flags.kind, "feature kind")
      ->check(CLI::IsMember({"salsa-lite", "salsa-mel", "mel-gcc"}));
  cmd->add_option("--tr", flags.block_seconds, "capture block duration in seconds")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--n", flags.blocks_per_window, "blocks per inference window")
      ->check(CLI::Range(1, 1024));
  cmd->add_option("--sample-rate", flags.sample_rate_hz, "expected sample rate in Hz")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--mel-bands", flags.mel_bands, "mel band count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cutoff-bins", flags.cutoff_bins, "frequency bin cutoff")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threshold", flags.threshold, "decode activity threshold");
  cmd->add_option("--merge-angle", flags.merge_angle_deg, "decode merge angle in degrees");
  cmd->add_option("--geometry", flags.geometry_kind, "microphone geometry")
      ->check(CLI::IsMember({"tetrahedral", "pair", "ring", "custom"}));
  cmd->add_option("--dmax", flags.d_max_m, "largest microphone distance in meters");
  cmd->add_option("--spacing", flags.spacing_m, "pair geometry spacing in meters");
  cmd->add_option("--backend", flags.backend_kind, "mock backend behavior")
      ->check(CLI::IsMember({"zeros", "fixed-linear", "scripted", "delay"}));
  cmd->add_option("--seed", flags.seed, "backend seed");
  cmd->add_option("--delay-seconds", flags.delay_seconds, "delay backend sleep time");
  cmd->add_option("--script", flags.script_path, "events CSV for the scripted backend");
}

RunConfig build_config(const CommonFlags& flags) {
  RunConfig config;
  if (flags.config_path) config = load_run_config(*flags.config_path);
  if (flags.kind) config.pipeline.kind = feature_kind_from_string(*flags.kind);
  if (flags.block_seconds) config.pipeline.block_seconds = *flags.block_seconds;
  if (flags.blocks_per_window) config.pipeline.blocks_per_window = *flags.blocks_per_window;
  if (flags.sample_rate_hz) {
    config.pipeline.feature.format.sample_rate_hz = *flags.sample_rate_hz;
    config.pipeline.feature.stft.sample_rate_hz = *flags.sample_rate_hz;
  }
  if (flags.mel_bands) {
    config.pipeline.feature.mel_bands = *flags.mel_bands;
    config.pipeline.feature.gcc_lags = *flags.mel_bands;
  }
  if (flags.cutoff_bins) config.pipeline.feature.salsa.cutoff_bins = *flags.cutoff_bins;
  if (flags.threshold) config.pipeline.decode.threshold = *flags.threshold;
  if (flags.merge_angle_deg) config.pipeline.decode.merge_angle_deg = *flags.merge_angle_deg;
  if (flags.geometry_kind) config.geometry.kind = *flags.geometry_kind;
  if (flags.d_max_m) config.geometry.d_max_m = *flags.d_max_m;
  if (flags.spacing_m) config.geometry.spacing_m = *flags.spacing_m;
  if (flags.backend_kind) config.backend.kind = *flags.backend_kind;
  if (flags.seed) config.backend.seed = *flags.seed;
  if (flags.delay_seconds) config.backend.delay_seconds = *flags.delay_seconds;
  if (flags.script_path) config.backend.script_path = *flags.script_path;
  config.finalize();
  return config;
}

bool maybe_print_config(const CommonFlags& flags, const RunConfig& config) {
  if (!flags.print_config) return false;
  std::cout << run_config_to_json(config).dump(2) << "\n";
  return true;
}

std::unique_ptr<ModelBackend> build_backend(const RunConfig& config, const BackendSpec& spec) {
  const BackendConfig& backend = config.backend;
  if (backend.kind == "zeros") return make_mock_backend(spec, MockBehavior::zeros());
  if (backend.kind == "fixed-linear") {
    return make_mock_backend(spec, MockBehavior::fixed_linear(backend.seed));
  }
  if (backend.kind == "delay") {
    return make_mock_backend(spec, MockBehavior::delay(backend.delay_seconds));
  }
  if (backend.kind == "scripted") {
    if (backend.script_path.empty()) {
      throw InvalidSpec("scripted backend needs --script <events.csv>");
    }
    // Script rows are on the scoring grid; map them onto output frames.
    LabelFrameSet script = read_label_csv(backend.script_path);
    std::vector<SeldEvent> events;
    for (const auto& [key, dirs] : script.entries) {
      const double time = (static_cast<double>(key.first) + 0.5) * script.frame_seconds;
      const auto out_frame = static_cast<std::int64_t>(time / spec.out_frame_seconds);
      for (const auto& dir : dirs) events.push_back({out_frame, key.second, dir, 1.0});
    }
    return make_mock_backend(spec, MockBehavior::scripted(events));
  }
  throw InvalidSpec("unknown backend kind '" + backend.kind + "'");
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

int cmd_extract(const CommonFlags& flags, const std::string& wav_path,
                const std::string& out_path, const std::optional<std::string>& csv_path) {
  RunConfig config = build_config(flags);
  if (maybe_print_config(flags, config)) return 0;

  MultichannelAudio audio = read_wav(wav_path, config.pipeline.feature.format);
  FeatureTensor tensor =
      extract_features(audio, config.pipeline.kind, config.pipeline.feature);
  write_feature_tensor(out_path, tensor);
  if (csv_path) write_feature_csv(*csv_path, tensor);

  RunManifest manifest;
  manifest.command = "extract";
  manifest.inputs["wav"] = wav_path;
  manifest.outputs["tensor"] = out_path;
  if (csv_path) manifest.outputs["csv"] = *csv_path;
  manifest.config = config;
  write_run_manifest(out_path + ".manifest.json", manifest);

  std::cout << "wrote " << to_string(tensor.kind()) << " tensor " << tensor.num_channels()
            << "x" << tensor.num_frames() << "x" << tensor.num_bins() << " to " << out_path
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

int cmd_run(const CommonFlags& flags, const std::string& wav_path, bool realtime,
            const std::string& events_path, const std::string& latency_path) {
  RunConfig config = build_config(flags);
  config.pipeline.realtime = realtime;
  if (maybe_print_config(flags, config)) return 0;

  MultichannelAudio audio = read_wav(wav_path, config.pipeline.feature.format);
  const BackendSpec spec = backend_spec_for(config.pipeline, config.backend.tracks,
                                            config.backend.classes, config.backend.time_pool);
  auto backend = build_backend(config, spec);

  std::unique_ptr<BlockSource> source;
  if (config.pipeline.realtime) {
    source = std::make_unique<SimulatedCaptureDevice>(std::move(audio),
                                                      config.pipeline.block_seconds);
  } else {
    source =
        std::make_unique<BufferBlockSource>(std::move(audio), config.pipeline.block_seconds);
  }

  std::vector<LatencyReport> reports;
  std::ofstream events_out(events_path, std::ios::trunc);
  if (!events_out) throw SeldError("cannot open " + events_path + " for writing");
  double covered_until = 0.0;
  const double label_frame_seconds = config.metrics.frame_seconds;

  WindowSink sink = [&](const WindowResult& result) {
    reports.push_back(result.report);
    for (const SeldEvent& event : result.events) {
      const double time = result.window_start_seconds +
                          (static_cast<double>(event.frame) + 0.5) * spec.out_frame_seconds;
      if (time < covered_until - 1e-12) continue;  // already reported by an older window
      double az = azimuth_deg_of(event.direction);
      long az_int = std::lround(az);
      if (az_int <= -180) az_int += 360;
      events_out << static_cast<std::int64_t>(time / label_frame_seconds) << ','
                 << event.class_id << ',' << az_int << ','
                 << std::lround(elevation_deg_of(event.direction)) << '\n';
    }
    covered_until = result.window_start_seconds + config.pipeline.window_seconds();
  };

  RunSummary summary = run_realtime(*source, config.pipeline, *backend, sink);
  events_out.close();
  write_latency_csv(latency_path, reports);

  RunManifest manifest;
  manifest.command = "run";
  manifest.inputs["wav"] = wav_path;
  manifest.outputs["events"] = events_path;
  manifest.outputs["latency"] = latency_path;
  manifest.config = config;
  write_run_manifest(latency_path + ".manifest.json", manifest);

  std::cout << "captured " << summary.blocks_captured << " blocks, processed "
            << summary.windows_processed << " windows (" << summary.overruns << " overruns, "
            << summary.windows_skipped << " skipped)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// profile
// ---------------------------------------------------------------------------

int cmd_profile(const CommonFlags& flags, const std::vector<std::string>& kind_names,
                const std::vector<double>& window_seconds, int iterations,
                const std::string& out_path) {
  RunConfig config = build_config(flags);
  if (maybe_print_config(flags, config)) return 0;

  std::vector<FeatureKind> kinds;
  for (const auto& name : kind_names) kinds.push_back(feature_kind_from_string(name));

  BackendFactory factory = [&](FeatureKind, const BackendSpec& spec) {
    return build_backend(config, spec);
  };
  SweepResult result =
      profile_sweep(kinds, window_seconds, iterations, config.pipeline.feature, factory,
                    config.pipeline.block_seconds, config.backend.seed);
  write_sweep_csv(out_path, result);

  RunManifest manifest;
  manifest.command = "profile";
  manifest.outputs["sweep"] = out_path;
  manifest.config = config;
  write_run_manifest(out_path + ".manifest.json", manifest);

  for (const SweepRow& row : result.rows) {
    std::printf("%-10s %-22s tw=%-4.2f feature=%.6fs inference=%.6fs\n",
                to_string(row.kind).c_str(), row.model.c_str(), row.window_seconds,
                row.mean_feature_seconds, row.mean_inference_seconds);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

int cmd_evaluate(const CommonFlags& flags, const std::string& ref_path,
                 const std::string& pred_path, const std::optional<std::string>& json_path) {
  RunConfig config = build_config(flags);
  if (maybe_print_config(flags, config)) return 0;

  LabelFrameSet refs = read_label_csv(ref_path, config.metrics.frame_seconds);
  LabelFrameSet preds = read_label_csv(pred_path, config.metrics.frame_seconds);
  MetricsReport report =
      compute_seld_metrics(refs, preds, config.metrics.spatial_threshold_deg);

  std::printf("%-28s %8s\n", "metric", "value");
  std::printf("%-28s %8.3f\n", "error rate (<=20 deg)", report.er);
  std::printf("%-28s %8.3f\n", "f-score (<=20 deg)", report.f1);
  std::printf("%-28s %8.1f\n", "localization error (deg)", report.le_deg);
  std::printf("%-28s %8.3f\n", "localization recall", report.lr);
  std::printf("%-28s %8.3f\n", "aggregate seld error", report.e_seld);

  nlohmann::json doc = {{"er", report.er},
                        {"f1", report.f1},
                        {"le_deg", report.le_deg},
                        {"lr", report.lr},
                        {"e_seld", report.e_seld}};
  const std::string out_path = json_path.value_or(pred_path + ".metrics.json");
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw SeldError("cannot open " + out_path + " for writing");
  out << doc.dump(2) << "\n";

  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.inputs["reference"] = ref_path;
  manifest.inputs["prediction"] = pred_path;
  manifest.outputs["report"] = out_path;
  manifest.config = config;
  write_run_manifest(out_path + ".manifest.json", manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const CommonFlags& flags, const std::string& out_path, double duration,
                 double azimuth_deg, double elevation_deg, const std::string& source_kind,
                 double tone_hz, std::uint64_t seed) {
  RunConfig config = build_config(flags);
  if (maybe_print_config(flags, config)) return 0;

  const AudioFormat& format = config.pipeline.feature.format;
  const auto samples = block_length_samples(duration, format.sample_rate_hz);
  std::vector<double> source;
  if (source_kind == "noise") {
    source = white_noise(samples, seed);
  } else {
    source = sine_tone(samples, tone_hz, format.sample_rate_hz);
  }
  const DirectionVector doa = direction_from_angles(azimuth_deg, elevation_deg);
  MultichannelAudio audio =
      simulate_plane_wave(source, doa, config.pipeline.feature.geometry, format);
  write_wav(out_path, audio, WavEncoding::Float32);

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.outputs["wav"] = out_path;
  manifest.config = config;
  write_run_manifest(out_path + ".manifest.json", manifest);

  std::cout << "wrote " << format.num_channels << "-channel scene (" << duration << " s, az "
            << azimuth_deg << ", el " << elevation_deg << ") to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time sound event localization and detection front end"};
  app.require_subcommand(1);

  CommonFlags flags;

  // extract
  auto* extract = app.add_subcommand("extract", "extract a feature tensor from a WAV file");
  std::string extract_wav, extract_out = "features.bin";
  std::optional<std::string> extract_csv;
  extract->add_option("wav", extract_wav, "input WAV file")->required();
  extract->add_option("-o,--output", extract_out, "output tensor file");
  extract->add_option("--csv", extract_csv, "also dump a debug CSV");
  add_common_flags(extract, flags);

  // run
  auto* run = app.add_subcommand("run", "stream a WAV file through the pipeline");
  std::string run_wav, run_events = "events.csv", run_latency = "latency.csv";
  bool run_realtime_flag = false;
  run->add_option("wav", run_wav, "input WAV file")->required();
  run->add_option("--events-out", run_events, "events CSV path");
  run->add_option("--latency-out", run_latency, "latency CSV path");
  run->add_flag("--realtime", run_realtime_flag, "pace capture against the wall clock");
  add_common_flags(run, flags);

  // profile
  auto* profile = app.add_subcommand("profile", "sweep feature latency over window lengths");
  std::vector<std::string> profile_kinds{"salsa-lite", "salsa-mel", "mel-gcc"};
  std::vector<double> profile_tw{1.0, 2.0, 3.0, 4.0, 5.0};
  int profile_iterations = 1000;
  std::string profile_out = "sweep.csv";
  profile->add_option("--kinds", profile_kinds, "feature kinds to profile")
      ->delimiter(',')
      ->check(CLI::IsMember({"salsa-lite", "salsa-mel", "mel-gcc"}));
  profile->add_option("--tw", profile_tw, "window lengths in seconds")->delimiter(',');
  profile->add_option("--iterations", profile_iterations, "iterations per configuration")
      ->check(CLI::PositiveNumber);
  profile->add_option("-o,--output", profile_out, "sweep CSV path");
  add_common_flags(profile, flags);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against references");
  std::string eval_ref, eval_pred;
  std::optional<std::string> eval_json;
  evaluate->add_option("reference", eval_ref, "reference label CSV")->required();
  evaluate->add_option("prediction", eval_pred, "prediction label CSV")->required();
  evaluate->add_option("-o,--output", eval_json, "metrics JSON path");
  add_common_flags(evaluate, flags);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "synthesize a plane-wave scene WAV");
  std::string sim_out = "scene.wav", sim_source = "noise";
  double sim_duration = 2.0, sim_az = 0.0, sim_el = 0.0, sim_freq = 1000.0;
  std::uint64_t sim_seed = 7;
  simulate->add_option("-o,--output", sim_out, "output WAV path");
  simulate->add_option("--duration", sim_duration, "scene length in seconds")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--azimuth", sim_az, "source azimuth in degrees");
  simulate->add_option("--elevation", sim_el, "source elevation in degrees");
  simulate->add_option("--source", sim_source, "source signal")
      ->check(CLI::IsMember({"noise", "tone"}));
  simulate->add_option("--freq", sim_freq, "tone frequency in Hz");
  simulate->add_option("--sim-seed", sim_seed, "noise seed");
  add_common_flags(simulate, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (extract->parsed()) return cmd_extract(flags, extract_wav, extract_out, extract_csv);
    if (run->parsed()) {
      return cmd_run(flags, run_wav, run_realtime_flag, run_events, run_latency);
    }
    if (profile->parsed()) {
      return cmd_profile(flags, profile_kinds, profile_tw, profile_iterations, profile_out);
    }
    if (evaluate->parsed()) return cmd_evaluate(flags, eval_ref, eval_pred, eval_json);
    if (simulate->parsed()) {
      return cmd_simulate(flags, sim_out, sim_duration, sim_az, sim_el, sim_source, sim_freq,
                          sim_seed);
    }
  } catch (const CsvParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidRange& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
