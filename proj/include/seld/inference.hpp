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

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "seld/errors.hpp"
#include "seld/features.hpp"

namespace seld {

/// Per-frame, per-track, per-class Cartesian activity vectors: the vector
/// norm is the class activity and its direction the arrival direction.
class MultiAccdoaOutput {
 public:
  MultiAccdoaOutput() = default;
  MultiAccdoaOutput(std::size_t frames, std::size_t tracks, std::size_t classes)
      : frames_(frames), tracks_(tracks), classes_(classes),
        values_(frames * tracks * classes * 3, 0.0) {}

  std::size_t num_frames() const { return frames_; }
  std::size_t num_tracks() const { return tracks_; }
  std::size_t num_classes() const { return classes_; }

  double& at(std::size_t frame, std::size_t track, std::size_t class_id, int axis) {
    return values_[((frame * tracks_ + track) * classes_ + class_id) * 3 +
                   static_cast<std::size_t>(axis)];
  }
  double at(std::size_t frame, std::size_t track, std::size_t class_id, int axis) const {
    return values_[((frame * tracks_ + track) * classes_ + class_id) * 3 +
                   static_cast<std::size_t>(axis)];
  }

  std::array<double, 3> vector_at(std::size_t frame, std::size_t track,
                                  std::size_t class_id) const {
    return {at(frame, track, class_id, 0), at(frame, track, class_id, 1),
            at(frame, track, class_id, 2)};
  }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  std::size_t frames_ = 0, tracks_ = 0, classes_ = 0;
  std::vector<double> values_;
};

/// One localized detection: class activity at a frame with a unit direction.
struct SeldEvent {
  std::int64_t frame = 0;
  int class_id = 0;
  std::array<double, 3> direction{0.0, 0.0, 1.0};
  double activity = 1.0;
};

/// Input/output contract of a model backend.
struct BackendSpec {
  FeatureKind kind = FeatureKind::SalsaLite;
  std::size_t channels = 7;
  std::size_t frames = 160;
  std::size_t bins = 191;

  std::size_t out_frames = 80;
  std::size_t tracks = 3;
  std::size_t classes = 13;
  double out_frame_seconds = 0.025;

  friend bool operator==(const BackendSpec&, const BackendSpec&) = default;
};

/// Pluggable inference engine. Implementations must be deterministic for a
/// fixed model; one instance is driven by a single caller at a time.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual const BackendSpec& spec() const = 0;
  virtual MultiAccdoaOutput run(const FeatureTensor& features) = 0;
  virtual std::string name() const = 0;
};

/// Validates the feature tensor against the backend contract, runs inference
/// and returns the output with the measured wall-clock seconds.
inline std::pair<MultiAccdoaOutput, double> run_backend(ModelBackend& backend,
                                                        const FeatureTensor& features) {
  const BackendSpec& spec = backend.spec();
  if (features.kind() != spec.kind || features.num_channels() != spec.channels ||
      features.num_frames() != spec.frames || features.num_bins() != spec.bins) {
    throw SpecMismatch("features are " + to_string(features.kind()) + " " +
                       std::to_string(features.num_channels()) + "x" +
                       std::to_string(features.num_frames()) + "x" +
                       std::to_string(features.num_bins()) + ", backend expects " +
                       to_string(spec.kind) + " " + std::to_string(spec.channels) + "x" +
                       std::to_string(spec.frames) + "x" + std::to_string(spec.bins));
  }
  const auto start = std::chrono::steady_clock::now();
  MultiAccdoaOutput output;
  try {
    output = backend.run(features);
  } catch (const SeldError&) {
    throw;
  } catch (const std::exception& e) {
    throw BackendFailure(std::string("backend '") + backend.name() + "' failed: " + e.what());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(output), seconds};
}

/// Turns raw track vectors into events. A track fires when its vector norm
/// exceeds `threshold`; same-class events in the same frame closer than
/// `merge_angle_deg` collapse to their normalized mean direction.
inline std::vector<SeldEvent> decode_multi_accdoa(const MultiAccdoaOutput& output,
                                                  double threshold = 0.5,
                                                  double merge_angle_deg = 15.0) {
  if (threshold <= 0.0) throw std::invalid_argument("threshold must be positive");
  if (merge_angle_deg < 0.0 || merge_angle_deg > 180.0) {
    throw std::invalid_argument("merge angle must be within [0, 180] degrees");
  }
  const double cos_merge = std::cos(merge_angle_deg * M_PI / 180.0);

  std::vector<SeldEvent> events;
  struct Cluster {
    std::array<double, 3> sum{0, 0, 0};
    double activity_sum = 0.0;
    int count = 0;
  };
  std::vector<Cluster> clusters;
  for (std::size_t t = 0; t < output.num_frames(); ++t) {
    for (std::size_t c = 0; c < output.num_classes(); ++c) {
      clusters.clear();
      for (std::size_t k = 0; k < output.num_tracks(); ++k) {
        const auto v = output.vector_at(t, k, c);
        const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if (norm <= threshold) continue;
        const std::array<double, 3> dir{v[0] / norm, v[1] / norm, v[2] / norm};
        Cluster* home = nullptr;
        for (auto& cluster : clusters) {
          const double s = std::sqrt(cluster.sum[0] * cluster.sum[0] +
                                     cluster.sum[1] * cluster.sum[1] +
                                     cluster.sum[2] * cluster.sum[2]);
          if (s == 0.0) continue;
          const double cosine =
              (cluster.sum[0] * dir[0] + cluster.sum[1] * dir[1] + cluster.sum[2] * dir[2]) / s;
          if (cosine >= cos_merge) {
            home = &cluster;
            break;
          }
        }
        if (!home) {
          clusters.push_back({});
          home = &clusters.back();
        }
        for (int a = 0; a < 3; ++a) home->sum[static_cast<std::size_t>(a)] += dir[static_cast<std::size_t>(a)];
        home->activity_sum += norm;
        ++home->count;
      }
      for (const auto& cluster : clusters) {
        const double s = std::sqrt(cluster.sum[0] * cluster.sum[0] +
                                   cluster.sum[1] * cluster.sum[1] +
                                   cluster.sum[2] * cluster.sum[2]);
        if (s == 0.0) continue;
        events.push_back({static_cast<std::int64_t>(t), static_cast<int>(c),
                          {cluster.sum[0] / s, cluster.sum[1] / s, cluster.sum[2] / s},
                          cluster.activity_sum / cluster.count});
      }
    }
  }
  return events;
}

/// Backend emitting all-zero outputs; decodes to no events.
class ZeroBackend : public ModelBackend {
 public:
  explicit ZeroBackend(BackendSpec spec) : spec_(spec) {}
  const BackendSpec& spec() const override { return spec_; }
  MultiAccdoaOutput run(const FeatureTensor&) override {
    return MultiAccdoaOutput(spec_.out_frames, spec_.tracks, spec_.classes);
  }
  std::string name() const override { return "zeros"; }

 private:
  BackendSpec spec_;
};

/// Deterministic sparse random linear projection of the input features.
/// Different seeds give different projections; the same seed is bitwise
/// reproducible across runs.
class FixedLinearBackend : public ModelBackend {
 public:
  FixedLinearBackend(BackendSpec spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
    const std::size_t input_size = spec.channels * spec.frames * spec.bins;
    const std::size_t output_size = spec.out_frames * spec.tracks * spec.classes * 3;
    if (input_size == 0 || output_size == 0) throw InvalidSpec("empty backend spec");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, input_size - 1);
    std::uniform_real_distribution<double> weight(-1.0, 1.0);
    taps_.resize(output_size * kTapsPerOutput);
    weights_.resize(output_size * kTapsPerOutput);
    for (std::size_t i = 0; i < taps_.size(); ++i) {
      taps_[i] = pick(rng);
      weights_[i] = weight(rng);
    }
  }

  const BackendSpec& spec() const override { return spec_; }

  MultiAccdoaOutput run(const FeatureTensor& features) override {
    MultiAccdoaOutput output(spec_.out_frames, spec_.tracks, spec_.classes);
    const auto& x = features.values();
    auto& y = output.values();
    for (std::size_t o = 0; o < y.size(); ++o) {
      double sum = 0.0;
      for (std::size_t k = 0; k < kTapsPerOutput; ++k) {
        sum += weights_[o * kTapsPerOutput + k] * x[taps_[o * kTapsPerOutput + k]];
      }
      y[o] = sum / static_cast<double>(kTapsPerOutput);
    }
    return output;
  }

  std::string name() const override { return "fixed-linear(" + std::to_string(seed_) + ")"; }

 private:
  static constexpr std::size_t kTapsPerOutput = 8;
  BackendSpec spec_;
  std::uint64_t seed_;
  std::vector<std::size_t> taps_;
  std::vector<double> weights_;
};

/// Emits exactly the given events (as vectors direction * activity) so that
/// decoding at threshold 0.5 recovers them. Event activities must exceed 0.5
/// and frames must fit the output spec.
class ScriptedBackend : public ModelBackend {
 public:
  ScriptedBackend(BackendSpec spec, std::vector<SeldEvent> events)
      : spec_(spec), output_(spec.out_frames, spec.tracks, spec.classes) {
    std::vector<std::vector<std::size_t>> used(spec.out_frames * spec.classes);
    for (const SeldEvent& event : events) {
      if (event.frame < 0 || static_cast<std::size_t>(event.frame) >= spec.out_frames ||
          event.class_id < 0 || static_cast<std::size_t>(event.class_id) >= spec.classes) {
        throw InvalidSpec("scripted event outside the output grid");
      }
      if (event.activity <= 0.5) {
        throw InvalidSpec("scripted event activity must exceed the 0.5 decode threshold");
      }
      auto& slot = used[static_cast<std::size_t>(event.frame) * spec.classes +
                        static_cast<std::size_t>(event.class_id)];
      if (slot.size() >= spec.tracks) {
        throw InvalidSpec("more scripted events than tracks in one frame/class");
      }
      const std::size_t track = slot.size();
      slot.push_back(track);
      for (int a = 0; a < 3; ++a) {
        output_.at(static_cast<std::size_t>(event.frame), track,
                   static_cast<std::size_t>(event.class_id), a) =
            event.direction[static_cast<std::size_t>(a)] * event.activity;
      }
    }
  }

  const BackendSpec& spec() const override { return spec_; }
  MultiAccdoaOutput run(const FeatureTensor&) override { return output_; }
  std::string name() const override { return "scripted"; }

 private:
  BackendSpec spec_;
  MultiAccdoaOutput output_;
};

/// Sleeps for a fixed wall-clock duration, then emits zeros. Used to emulate
/// a model that misses the capture deadline.
class DelayBackend : public ModelBackend {
 public:
  DelayBackend(BackendSpec spec, double delay_seconds)
      : spec_(spec), delay_seconds_(delay_seconds) {
    if (delay_seconds < 0.0) throw InvalidSpec("delay must be non-negative");
  }
  const BackendSpec& spec() const override { return spec_; }
  MultiAccdoaOutput run(const FeatureTensor&) override {
    std::this_thread::sleep_for(std::chrono::duration<double>(delay_seconds_));
    return MultiAccdoaOutput(spec_.out_frames, spec_.tracks, spec_.classes);
  }
  std::string name() const override {
    return "delay(" + std::to_string(delay_seconds_) + "s)";
  }

 private:
  BackendSpec spec_;
  double delay_seconds_;
};

/// Requested mock behavior for make_mock_backend.
struct MockBehavior {
  enum class Kind { Zeros, FixedLinear, Scripted, Delay } kind = Kind::Zeros;
  std::uint64_t seed = 0;
  double delay_seconds = 0.0;
  std::vector<SeldEvent> events;

  static MockBehavior zeros() { return {}; }
  static MockBehavior fixed_linear(std::uint64_t seed) {
    return {Kind::FixedLinear, seed, 0.0, {}};
  }
  static MockBehavior scripted(std::vector<SeldEvent> events) {
    return {Kind::Scripted, 0, 0.0, std::move(events)};
  }
  static MockBehavior delay(double seconds) { return {Kind::Delay, 0, seconds, {}}; }
};

inline std::unique_ptr<ModelBackend> make_mock_backend(const BackendSpec& spec,
                                                       const MockBehavior& behavior) {
  if (spec.channels == 0 || spec.frames == 0 || spec.bins == 0 || spec.out_frames == 0 ||
      spec.tracks == 0 || spec.classes == 0 || spec.out_frame_seconds <= 0.0) {
    throw InvalidSpec("backend spec has empty dimensions");
  }
  if (spec.out_frames > spec.frames) {
    throw InvalidSpec("output frames exceed input frames");
  }
  switch (behavior.kind) {
    case MockBehavior::Kind::Zeros:
      return std::make_unique<ZeroBackend>(spec);
    case MockBehavior::Kind::FixedLinear:
      return std::make_unique<FixedLinearBackend>(spec, behavior.seed);
    case MockBehavior::Kind::Scripted:
      return std::make_unique<ScriptedBackend>(spec, behavior.events);
    case MockBehavior::Kind::Delay:
      return std::make_unique<DelayBackend>(spec, behavior.delay_seconds);
  }
  throw InvalidSpec("unknown mock behavior");
}

}  // namespace seld
