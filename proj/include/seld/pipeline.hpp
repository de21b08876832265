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
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "seld/audio.hpp"
#include "seld/capture.hpp"
#include "seld/errors.hpp"
#include "seld/features.hpp"
#include "seld/inference.hpp"
#include "seld/simulate.hpp"

namespace seld {

/// Decode stage parameters.
struct DecodeConfig {
  double threshold = 0.5;
  double merge_angle_deg = 15.0;
};

/// Windowing and processing parameters of the capture/inference loop.
/// The window spans blocks_per_window consecutive blocks of block_seconds
/// each; processing one window must finish within block_seconds or the
/// capture buffer overruns.
struct PipelineConfig {
  double block_seconds = 1.0;  // capture block duration
  int blocks_per_window = 2;   // blocks per inference window
  FeatureKind kind = FeatureKind::SalsaLite;
  FeatureConfig feature{};
  DecodeConfig decode{};
  bool realtime = false;  // false: deterministic single-context loop

  double window_seconds() const { return block_seconds * blocks_per_window; }
};

/// Timing decomposition of one processed window against the block budget.
/// excess_seconds = block budget - feature - inference; negative excess means
/// the deadline was missed.
struct LatencyReport {
  double feature_seconds = 0.0;
  double inference_seconds = 0.0;
  double excess_seconds = 0.0;
  bool overrun = false;
  std::int64_t block_index = -1;
};

/// Splits the block budget into feature, inference and excess time.
inline LatencyReport check_budget(double feature_seconds, double inference_seconds,
                                  double block_budget_seconds, std::int64_t block_index = -1) {
  if (feature_seconds < 0.0 || inference_seconds < 0.0 || block_budget_seconds < 0.0) {
    throw std::invalid_argument("latency components must be non-negative");
  }
  LatencyReport report;
  report.feature_seconds = feature_seconds;
  report.inference_seconds = inference_seconds;
  report.excess_seconds = block_budget_seconds - feature_seconds - inference_seconds;
  report.overrun = report.excess_seconds < 0.0;
  report.block_index = block_index;
  return report;
}

/// Everything the sink sees for one processed window.
struct WindowResult {
  std::int64_t block_index = 0;        // newest block in the window
  double window_start_seconds = 0.0;   // stream time of the window start
  std::vector<SeldEvent> events;
  LatencyReport report;
};

using WindowSink = std::function<void(const WindowResult&)>;

/// Outcome of a pipeline run.
struct RunSummary {
  std::int64_t blocks_captured = 0;
  std::int64_t last_sequence_index = -1;
  std::int64_t windows_processed = 0;
  std::int64_t overruns = 0;
  std::int64_t windows_skipped = 0;  // superseded while processing lagged behind
  std::uint64_t blocks_dropped = 0;  // evicted before ever being read
  bool source_exhausted = false;
};

namespace detail {

struct StageTimes {
  double feature_seconds = 0.0;
  double inference_seconds = 0.0;
};

// Feature extraction, inference and decoding for one window. Decoding is
// post-processing and is folded into the inference time.
inline std::pair<std::vector<SeldEvent>, StageTimes> process_window(
    const MultichannelAudio& window, const PipelineConfig& config, ModelBackend& backend,
    const MelFilterbank* bank) {
  using clock = std::chrono::steady_clock;
  StageTimes times;
  const auto t0 = clock::now();
  const FeatureTensor features = extract_features(window, config.kind, config.feature, bank);
  const auto t1 = clock::now();
  auto [output, inference_seconds] = run_backend(backend, features);
  std::vector<SeldEvent> events =
      decode_multi_accdoa(output, config.decode.threshold, config.decode.merge_angle_deg);
  const auto t2 = clock::now();
  times.feature_seconds = std::chrono::duration<double>(t1 - t0).count();
  times.inference_seconds = std::chrono::duration<double>(t2 - t1).count();
  return {std::move(events), times};
}

inline void validate_backend_spec(const PipelineConfig& config, ModelBackend& backend) {
  const std::size_t window_samples = block_length_samples(
      config.window_seconds(), config.feature.format.sample_rate_hz);
  const std::size_t frames = stft_num_frames(window_samples, config.feature.stft);
  const BackendSpec& spec = backend.spec();
  if (spec.kind != config.kind || spec.channels != config.feature.feature_channels(config.kind) ||
      spec.frames != frames || spec.bins != config.feature.feature_bins(config.kind)) {
    throw SpecMismatch("backend spec does not match " + to_string(config.kind) + " features at " +
                       std::to_string(config.window_seconds()) + " s windows");
  }
}

}  // namespace detail

/// Builds a backend spec matching the features the pipeline will produce.
inline BackendSpec backend_spec_for(const PipelineConfig& config, std::size_t tracks = 3,
                                    std::size_t classes = 13, std::size_t time_pool = 2) {
  const std::size_t window_samples =
      block_length_samples(config.window_seconds(), config.feature.format.sample_rate_hz);
  const std::size_t frames = stft_num_frames(window_samples, config.feature.stft);
  BackendSpec spec;
  spec.kind = config.kind;
  spec.channels = config.feature.feature_channels(config.kind);
  spec.frames = frames;
  spec.bins = config.feature.feature_bins(config.kind);
  spec.out_frames = frames / time_pool;
  spec.tracks = tracks;
  spec.classes = classes;
  spec.out_frame_seconds = config.window_seconds() / static_cast<double>(spec.out_frames);
  return spec;
}

/// Runs the capture/extract/infer/decode loop until the source is exhausted.
///
/// In deterministic mode every block is processed in the calling context with
/// no wall-clock pacing: one window per block once the buffer is full. In
/// realtime mode a capture thread pulls blocks (the source paces) while this
/// context processes the freshest available window; windows that become stale
/// while processing lags are skipped and counted, and capture is never
/// back-pressured.
inline RunSummary run_realtime(BlockSource& source, const PipelineConfig& config,
                               ModelBackend& backend, const WindowSink& sink) {
  detail::validate_backend_spec(config, backend);
  const MelFilterbank bank =
      config.kind == FeatureKind::SalsaLite ? MelFilterbank{} : config.feature.make_filterbank();
  const MelFilterbank* bank_ptr = config.kind == FeatureKind::SalsaLite ? nullptr : &bank;
  const std::size_t block_samples =
      block_length_samples(config.block_seconds, config.feature.format.sample_rate_hz);

  RunSummary summary;
  BlockRingBuffer buffer(config.blocks_per_window, block_samples);

  auto emit = [&](const MultichannelAudio& window, std::int64_t newest_seq) {
    auto [events, times] = detail::process_window(window, config, backend, bank_ptr);
    WindowResult result;
    result.block_index = newest_seq;
    result.window_start_seconds =
        (static_cast<double>(newest_seq) + 1.0) * config.block_seconds -
        config.window_seconds();
    result.events = std::move(events);
    result.report = check_budget(times.feature_seconds, times.inference_seconds,
                                 config.block_seconds, newest_seq);
    ++summary.windows_processed;
    if (result.report.overrun) ++summary.overruns;
    if (sink) sink(result);
  };

  if (!config.realtime) {
    while (auto block = source.next_block()) {
      summary.last_sequence_index = block->sequence_index;
      ++summary.blocks_captured;
      buffer.push_block(std::move(*block));
      if (buffer.size() == static_cast<std::size_t>(config.blocks_per_window)) {
        emit(buffer.latest_window(), summary.last_sequence_index);
      }
    }
    summary.source_exhausted = true;
    summary.blocks_dropped = buffer.dropped_count();
    return summary;
  }

  std::thread capture([&] {
    while (auto block = source.next_block()) {
      summary.last_sequence_index = block->sequence_index;
      ++summary.blocks_captured;
      buffer.push_block(std::move(*block));
    }
    buffer.close();
  });

  std::int64_t last_processed = -1;
  while (true) {
    auto window = buffer.wait_for_fresh_window(last_processed, std::chrono::milliseconds(50));
    if (!window) {
      const bool no_full_window =
          buffer.size() < static_cast<std::size_t>(config.blocks_per_window);
      if (buffer.closed() && (no_full_window || buffer.newest_sequence() <= last_processed)) {
        break;
      }
      continue;
    }
    auto& [audio, newest_seq] = *window;
    if (last_processed >= 0) {
      summary.windows_skipped += newest_seq - last_processed - 1;
    }
    emit(audio, newest_seq);
    last_processed = newest_seq;
  }
  capture.join();
  summary.source_exhausted = true;
  summary.blocks_dropped = buffer.dropped_count();
  return summary;
}

// ---------------------------------------------------------------------------
// Latency profiling sweep
// ---------------------------------------------------------------------------

struct SweepRow {
  FeatureKind kind;
  std::string model;
  double window_seconds = 0.0;
  double mean_feature_seconds = 0.0;
  double mean_inference_seconds = 0.0;
  double mean_excess_seconds = 0.0;
  int iterations = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

using BackendFactory =
    std::function<std::unique_ptr<ModelBackend>(FeatureKind, const BackendSpec&)>;

/// Measures mean feature/inference wall-clock time per kind and window
/// length on synthetic audio. Rows come out sorted by window length within
/// each kind. The excess column is against block_seconds.
inline SweepResult profile_sweep(const std::vector<FeatureKind>& kinds,
                                 std::vector<double> window_seconds_values, int iterations,
                                 const FeatureConfig& feature, const BackendFactory& make_backend,
                                 double block_seconds = 1.0, std::uint64_t seed = 1234) {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  std::sort(window_seconds_values.begin(), window_seconds_values.end());
  SweepResult result;
  for (FeatureKind kind : kinds) {
    const MelFilterbank bank =
        kind == FeatureKind::SalsaLite ? MelFilterbank{} : mel_filterbank(
            feature.stft, feature.mel_bands, feature.mel_fmin_hz, feature.mel_fmax_hz);
    const MelFilterbank* bank_ptr = kind == FeatureKind::SalsaLite ? nullptr : &bank;
    for (double tw : window_seconds_values) {
      const std::size_t samples = block_length_samples(tw, feature.format.sample_rate_hz);
      MultichannelAudio audio(feature.format, samples);
      {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-0.5, 0.5);
        for (int ch = 0; ch < feature.format.num_channels; ++ch) {
          for (auto& v : audio.channel(ch)) v = dist(rng);
        }
      }
      BackendSpec spec;
      spec.kind = kind;
      spec.channels = feature.feature_channels(kind);
      spec.frames = stft_num_frames(samples, feature.stft);
      spec.bins = feature.feature_bins(kind);
      spec.out_frames = std::max<std::size_t>(1, spec.frames / 2);
      spec.out_frame_seconds = tw / static_cast<double>(spec.out_frames);
      auto backend = make_backend(kind, spec);

      double feature_total = 0.0, inference_total = 0.0;
      using clock = std::chrono::steady_clock;
      for (int i = 0; i < iterations; ++i) {
        const auto t0 = clock::now();
        const FeatureTensor tensor = extract_features(audio, kind, feature, bank_ptr);
        const auto t1 = clock::now();
        auto [output, seconds] = run_backend(*backend, tensor);
        (void)output;
        feature_total += std::chrono::duration<double>(t1 - t0).count();
        inference_total += seconds;
      }
      SweepRow row;
      row.kind = kind;
      row.model = backend->name();
      row.window_seconds = tw;
      row.mean_feature_seconds = feature_total / iterations;
      row.mean_inference_seconds = inference_total / iterations;
      row.mean_excess_seconds =
          block_seconds - row.mean_feature_seconds - row.mean_inference_seconds;
      row.iterations = iterations;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

inline void write_latency_csv(const std::string& path,
                              const std::vector<LatencyReport>& reports) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw SeldError("cannot open " + path + " for writing");
  out << "block_index,feature_s,inference_s,excess_s,overrun\n" << std::setprecision(9);
  for (const LatencyReport& report : reports) {
    out << report.block_index << ',' << report.feature_seconds << ','
        << report.inference_seconds << ',' << report.excess_seconds << ','
        << (report.overrun ? 1 : 0) << '\n';
  }
}

inline void write_sweep_csv(const std::string& path, const SweepResult& result) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw SeldError("cannot open " + path + " for writing");
  out << "kind,model,tw_seconds,feature_s,inference_s,excess_s,iterations\n"
      << std::setprecision(9);
  for (const SweepRow& row : result.rows) {
    out << to_string(row.kind) << ',' << row.model << ',' << row.window_seconds << ','
        << row.mean_feature_seconds << ',' << row.mean_inference_seconds << ','
        << row.mean_excess_seconds << ',' << row.iterations << '\n';
  }
}

}  // namespace seld
