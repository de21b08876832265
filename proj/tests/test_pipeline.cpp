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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <fstream>

#include "seld/pipeline.hpp"
#include "test_support.hpp"

using namespace seld;
using seld::test::TempDir;

namespace {

PipelineConfig small_config(FeatureKind kind = FeatureKind::SalsaLite) {
  PipelineConfig config;
  config.kind = kind;
  config.block_seconds = 1.0;
  config.blocks_per_window = 2;
  config.feature.format = AudioFormat{24000, 4};
  return config;
}

}  // namespace

TEST_CASE("budget accounting", "[pipeline][budget]") {
  SECTION("reference timing row splits into 0.574 s of excess") {
    LatencyReport report = check_budget(0.205, 0.221, 1.0);
    REQUIRE(report.excess_seconds == Catch::Approx(0.574).margin(1e-12));
    REQUIRE_FALSE(report.overrun);
  }
  SECTION("an idle pipeline keeps the whole budget") {
    LatencyReport report = check_budget(0.0, 0.0, 1.0);
    REQUIRE(report.excess_seconds == 1.0);
    REQUIRE_FALSE(report.overrun);
  }
  SECTION("exceeding the block duration flags an overrun") {
    LatencyReport report = check_budget(0.6, 0.5, 1.0);
    REQUIRE(report.excess_seconds == Catch::Approx(-0.1).margin(1e-12));
    REQUIRE(report.overrun);
  }
  SECTION("negative components are rejected") {
    REQUIRE_THROWS_AS(check_budget(-0.1, 0.0, 1.0), std::invalid_argument);
  }
}

TEST_CASE("deterministic pipeline run", "[pipeline][run]") {
  PipelineConfig config = small_config();
  BackendSpec spec = backend_spec_for(config);
  REQUIRE(spec.channels == 7);
  REQUIRE(spec.frames == 160);
  REQUIRE(spec.bins == 191);
  REQUIRE(spec.out_frames == 80);

  SECTION("ten seconds with a zero backend gives nine empty reports") {
    MultichannelAudio audio = test::noise_audio(config.feature.format, 24000 * 10, 1);
    BufferBlockSource source(audio, config.block_seconds);
    auto backend = make_mock_backend(spec, MockBehavior::zeros());
    std::vector<WindowResult> results;
    RunSummary summary = run_realtime(source, config, *backend,
                                      [&](const WindowResult& r) { results.push_back(r); });
    REQUIRE(summary.source_exhausted);
    REQUIRE(summary.blocks_captured == 10);
    REQUIRE(summary.windows_processed == 9);
    REQUIRE(results.size() == 9);
    for (const auto& result : results) {
      REQUIRE(result.events.empty());
      REQUIRE_FALSE(result.report.overrun);
      // Identity by construction of the budget split.
      REQUIRE(result.report.excess_seconds ==
              config.block_seconds - result.report.feature_seconds -
                  result.report.inference_seconds);
    }
    // Windows advance one block at a time.
    for (std::size_t i = 0; i < results.size(); ++i) {
      REQUIRE(results[i].block_index == static_cast<std::int64_t>(i) + 1);
      REQUIRE(results[i].window_start_seconds ==
              Catch::Approx(static_cast<double>(i)).margin(1e-12));
    }
  }

  SECTION("scripted events reach the sink every window") {
    std::vector<SeldEvent> script;
    for (int frame = 0; frame < 5; ++frame) script.push_back({frame, 3, {0, 0, 1}, 1.0});
    auto backend = make_mock_backend(spec, MockBehavior::scripted(script));
    MultichannelAudio audio = test::noise_audio(config.feature.format, 24000 * 4, 2);
    BufferBlockSource source(audio, config.block_seconds);
    int windows = 0;
    RunSummary summary = run_realtime(source, config, *backend, [&](const WindowResult& r) {
      ++windows;
      REQUIRE(r.events.size() == 5);
      for (const auto& event : r.events) REQUIRE(event.class_id == 3);
    });
    REQUIRE(windows == 3);
    REQUIRE(summary.windows_processed == 3);
  }

  SECTION("backend spec mismatches are rejected up front") {
    BackendSpec wrong = spec;
    wrong.bins = 100;
    auto backend = make_mock_backend(wrong, MockBehavior::zeros());
    MultichannelAudio audio = test::noise_audio(config.feature.format, 24000 * 2, 3);
    BufferBlockSource source(audio, config.block_seconds);
    REQUIRE_THROWS_AS(run_realtime(source, config, *backend, nullptr), SpecMismatch);
  }
}

TEST_CASE("realtime pipeline keeps capturing when processing overruns",
          "[pipeline][realtime]") {
  // Scaled-down timings: 0.1 s blocks against a 0.15 s inference delay.
  PipelineConfig config = small_config();
  config.block_seconds = 0.1;
  config.realtime = true;
  BackendSpec spec = backend_spec_for(config);
  auto backend = make_mock_backend(spec, MockBehavior::delay(0.15));

  MultichannelAudio audio = test::noise_audio(config.feature.format, 24000 * 2, 4);  // 20 blocks
  SimulatedCaptureDevice source(audio, config.block_seconds);
  std::vector<LatencyReport> reports;
  RunSummary summary = run_realtime(source, config, *backend, [&](const WindowResult& r) {
    reports.push_back(r.report);
  });

  REQUIRE(summary.blocks_captured == 20);         // capture never stalled
  REQUIRE(summary.last_sequence_index == 19);
  REQUIRE(summary.windows_processed >= 2);
  for (const auto& report : reports) REQUIRE(report.overrun);
  REQUIRE(summary.overruns == summary.windows_processed);
  REQUIRE(summary.windows_skipped >= 1);  // stale windows were dropped
}

TEST_CASE("realtime pipeline with headroom processes nearly every window",
          "[pipeline][realtime]") {
  PipelineConfig config = small_config();
  config.block_seconds = 0.25;
  config.realtime = true;
  BackendSpec spec = backend_spec_for(config);
  auto backend = make_mock_backend(spec, MockBehavior::zeros());

  MultichannelAudio audio = test::noise_audio(config.feature.format, 24000 * 2, 5);  // 8 blocks
  SimulatedCaptureDevice source(audio, config.block_seconds);
  RunSummary summary = run_realtime(source, config, *backend, nullptr);
  REQUIRE(summary.blocks_captured == 8);
  REQUIRE(summary.windows_processed >= 6);
  REQUIRE(summary.overruns == 0);
}

TEST_CASE("realtime run with a source shorter than one window terminates",
          "[pipeline][realtime]") {
  PipelineConfig config = small_config();
  config.block_seconds = 0.1;
  config.realtime = true;
  BackendSpec spec = backend_spec_for(config);
  auto backend = make_mock_backend(spec, MockBehavior::zeros());
  MultichannelAudio audio = test::noise_audio(config.feature.format, 2400, 6);  // one block
  SimulatedCaptureDevice source(audio, config.block_seconds);
  RunSummary summary = run_realtime(source, config, *backend, nullptr);
  REQUIRE(summary.blocks_captured == 1);
  REQUIRE(summary.windows_processed == 0);
  REQUIRE(summary.source_exhausted);
}

TEST_CASE("profile sweep", "[pipeline][sweep]") {
  FeatureConfig feature;
  feature.format = AudioFormat{24000, 4};
  BackendFactory factory = [](FeatureKind, const BackendSpec& spec) {
    return make_mock_backend(spec, MockBehavior::zeros());
  };

  SECTION("one kind and one window length gives a single row") {
    SweepResult result = profile_sweep({FeatureKind::SalsaLite}, {1.0}, 1, feature, factory);
    REQUIRE(result.rows.size() == 1);
    REQUIRE(result.rows[0].iterations == 1);
    REQUIRE(result.rows[0].window_seconds == 1.0);
    REQUIRE(result.rows[0].mean_feature_seconds > 0.0);
  }

  SECTION("rows come out sorted by window length with the requested schema") {
    SweepResult result =
        profile_sweep({FeatureKind::SalsaLite, FeatureKind::MelGcc}, {2.0, 1.0}, 2, feature,
                      factory);
    REQUIRE(result.rows.size() == 4);
    REQUIRE(result.rows[0].window_seconds == 1.0);
    REQUIRE(result.rows[1].window_seconds == 2.0);
    REQUIRE(result.rows[2].kind == FeatureKind::MelGcc);

    TempDir dir;
    write_sweep_csv(dir.file("sweep.csv"), result);
    std::ifstream in(dir.file("sweep.csv"));
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "kind,model,tw_seconds,feature_s,inference_s,excess_s,iterations");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    REQUIRE(rows == 4);
  }

  SECTION("iterations must be positive") {
    REQUIRE_THROWS_AS(profile_sweep({FeatureKind::SalsaLite}, {1.0}, 0, feature, factory),
                      std::invalid_argument);
  }

  SECTION("feature time is non-decreasing in the window length") {
    // Medians over five sweeps to damp scheduler noise.
    const std::vector<double> windows{0.5, 1.0, 2.0};
    std::vector<std::vector<double>> samples(windows.size());
    for (int sweep = 0; sweep < 5; ++sweep) {
      SweepResult result =
          profile_sweep({FeatureKind::SalsaLite}, windows, 2, feature, factory);
      for (std::size_t i = 0; i < windows.size(); ++i) {
        samples[i].push_back(result.rows[i].mean_feature_seconds);
      }
    }
    std::vector<double> medians;
    for (auto& column : samples) {
      std::sort(column.begin(), column.end());
      medians.push_back(column[column.size() / 2]);
    }
    REQUIRE(medians[0] < medians[1]);
    REQUIRE(medians[1] < medians[2]);
  }
}

TEST_CASE("latency csv", "[pipeline][csv]") {
  TempDir dir;
  std::vector<LatencyReport> reports;
  reports.push_back(check_budget(0.1, 0.2, 1.0, 1));
  reports.push_back(check_budget(0.7, 0.4, 1.0, 2));
  write_latency_csv(dir.file("latency.csv"), reports);
  std::ifstream in(dir.file("latency.csv"));
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "block_index,feature_s,inference_s,excess_s,overrun");
  std::getline(in, line);
  REQUIRE(line.substr(0, 2) == "1,");
  REQUIRE(line.back() == '0');
  std::getline(in, line);
  REQUIRE(line.back() == '1');  // overrun flag
}
