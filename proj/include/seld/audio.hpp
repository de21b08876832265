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

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seld/errors.hpp"

namespace seld {

/// Sample rate and channel count shared by every stage of the processing
/// chain. Samples are normalized reals in [-1, 1].
struct AudioFormat {
  int sample_rate_hz = 24000;
  int num_channels = 4;

  friend bool operator==(const AudioFormat&, const AudioFormat&) = default;
};

/// A fixed-length multichannel sample buffer, channel-major in memory.
class MultichannelAudio {
 public:
  MultichannelAudio() = default;

  MultichannelAudio(AudioFormat format, std::size_t num_samples)
      : format_(format),
        num_samples_(num_samples),
        samples_(static_cast<std::size_t>(format.num_channels) * num_samples, 0.0) {}

  const AudioFormat& format() const { return format_; }
  int num_channels() const { return format_.num_channels; }
  std::size_t num_samples() const { return num_samples_; }
  double duration_seconds() const {
    return static_cast<double>(num_samples_) / format_.sample_rate_hz;
  }

  std::span<double> channel(int i) {
    return {samples_.data() + static_cast<std::size_t>(i) * num_samples_, num_samples_};
  }
  std::span<const double> channel(int i) const {
    return {samples_.data() + static_cast<std::size_t>(i) * num_samples_, num_samples_};
  }

  double& at(int channel_index, std::size_t sample_index) {
    return samples_[static_cast<std::size_t>(channel_index) * num_samples_ + sample_index];
  }
  double at(int channel_index, std::size_t sample_index) const {
    return samples_[static_cast<std::size_t>(channel_index) * num_samples_ + sample_index];
  }

 private:
  AudioFormat format_{};
  std::size_t num_samples_ = 0;
  std::vector<double> samples_;
};

/// One capture block of exactly block_seconds * sample_rate samples per
/// channel, tagged with a monotonically increasing sequence index.
struct AudioBlock {
  MultichannelAudio audio;
  std::int64_t sequence_index = 0;
};

/// Number of samples per channel in a block of `block_seconds`.
inline std::size_t block_length_samples(double block_seconds, int sample_rate_hz) {
  return static_cast<std::size_t>(std::llround(block_seconds * sample_rate_hz));
}

/// Bounded FIFO of the most recent capture blocks.
///
/// Holds at most `capacity` blocks; pushing into a full buffer evicts the
/// oldest block. Evicting a block that was never part of a returned window
/// increments dropped_count (capture must never stall, so overwrite is not an
/// error). Safe for one producer (push_block) and one consumer
/// (latest_window / wait_for_fresh_window) running concurrently.
class BlockRingBuffer {
 public:
  explicit BlockRingBuffer(int capacity, std::size_t samples_per_block = 0)
      : capacity_(capacity), samples_per_block_(samples_per_block) {
    if (capacity < 1) throw std::invalid_argument("ring buffer capacity must be >= 1");
  }

  /// Appends a block, evicting the oldest one when full.
  void push_block(AudioBlock block) {
    std::lock_guard lock(mutex_);
    if (samples_per_block_ == 0) samples_per_block_ = block.audio.num_samples();
    if (block.audio.num_samples() != samples_per_block_) {
      throw BlockLengthMismatch("block has " + std::to_string(block.audio.num_samples()) +
                                " samples, expected " + std::to_string(samples_per_block_));
    }
    if (!blocks_.empty() && block.sequence_index != blocks_.back().sequence_index + 1) {
      throw std::invalid_argument("block sequence indices must be consecutive");
    }
    if (blocks_.size() == static_cast<std::size_t>(capacity_)) {
      if (blocks_.front().sequence_index > last_read_sequence_) ++dropped_count_;
      blocks_.pop_front();
    }
    blocks_.push_back(std::move(block));
    cv_.notify_all();
  }

  /// Concatenates the `capacity` most recent blocks in time order.
  MultichannelAudio latest_window() {
    std::lock_guard lock(mutex_);
    if (blocks_.size() < static_cast<std::size_t>(capacity_)) {
      throw InsufficientBlocks("buffer holds " + std::to_string(blocks_.size()) + " of " +
                               std::to_string(capacity_) + " blocks");
    }
    return assemble_window_locked();
  }

  /// Blocks until a window newer than `last_sequence` is available, the
  /// buffer is closed, or the timeout expires. Returns the window audio and
  /// the sequence index of its newest block.
  std::optional<std::pair<MultichannelAudio, std::int64_t>> wait_for_fresh_window(
      std::int64_t last_sequence,
      std::chrono::milliseconds timeout = std::chrono::milliseconds(100)) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] {
      return closed_ || (blocks_.size() == static_cast<std::size_t>(capacity_) &&
                         blocks_.back().sequence_index > last_sequence);
    });
    if (blocks_.size() < static_cast<std::size_t>(capacity_) ||
        blocks_.back().sequence_index <= last_sequence) {
      return std::nullopt;
    }
    std::int64_t newest = blocks_.back().sequence_index;
    return std::make_pair(assemble_window_locked(), newest);
  }

  /// Wakes any waiting consumer; used when the producer is done.
  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    cv_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return blocks_.size();
  }

  int capacity() const { return capacity_; }

  /// Sequence index of the newest held block, or -1 when empty.
  std::int64_t newest_sequence() const {
    std::lock_guard lock(mutex_);
    return blocks_.empty() ? -1 : blocks_.back().sequence_index;
  }

  /// Number of evicted blocks that were never part of a returned window.
  std::uint64_t dropped_count() const {
    std::lock_guard lock(mutex_);
    return dropped_count_;
  }

 private:
  MultichannelAudio assemble_window_locked() {
    const AudioFormat format = blocks_.front().audio.format();
    MultichannelAudio window(format, samples_per_block_ * blocks_.size());
    std::size_t offset = 0;
    for (const AudioBlock& block : blocks_) {
      for (int ch = 0; ch < format.num_channels; ++ch) {
        auto src = block.audio.channel(ch);
        std::copy(src.begin(), src.end(), window.channel(ch).begin() + offset);
      }
      offset += samples_per_block_;
    }
    last_read_sequence_ = std::max(last_read_sequence_, blocks_.back().sequence_index);
    return window;
  }

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  int capacity_;
  std::size_t samples_per_block_;
  std::deque<AudioBlock> blocks_;
  std::int64_t last_read_sequence_ = -1;
  std::uint64_t dropped_count_ = 0;
  bool closed_ = false;
};

/// Microphone positions in meters plus the propagation speed used to turn
/// path differences into delays.
struct ArrayGeometry {
  std::vector<std::array<double, 3>> mic_positions;
  double speed_of_sound = 343.0;

  int num_mics() const { return static_cast<int>(mic_positions.size()); }

  /// Largest pairwise microphone distance (meters).
  double max_pair_distance() const {
    double d_max = 0.0;
    for (std::size_t i = 0; i < mic_positions.size(); ++i) {
      for (std::size_t j = i + 1; j < mic_positions.size(); ++j) {
        double dx = mic_positions[i][0] - mic_positions[j][0];
        double dy = mic_positions[i][1] - mic_positions[j][1];
        double dz = mic_positions[i][2] - mic_positions[j][2];
        d_max = std::max(d_max, std::sqrt(dx * dx + dy * dy + dz * dz));
      }
    }
    return d_max;
  }

  /// Largest physically possible interchannel lag in samples.
  double max_lag_samples(int sample_rate_hz) const {
    return sample_rate_hz * max_pair_distance() / speed_of_sound;
  }
};

/// Regular tetrahedron centered at the origin with the given largest pairwise
/// distance. All six pairs share the same spacing.
inline ArrayGeometry make_tetrahedral_geometry(double d_max = 0.084,
                                               double speed_of_sound = 343.0) {
  const double s = d_max / (2.0 * std::sqrt(2.0));
  ArrayGeometry geometry;
  geometry.mic_positions = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  geometry.speed_of_sound = speed_of_sound;
  return geometry;
}

/// Two microphones on the x axis, `spacing` meters apart, centered at origin.
inline ArrayGeometry make_pair_geometry(double spacing, double speed_of_sound = 343.0) {
  ArrayGeometry geometry;
  geometry.mic_positions = {{spacing / 2.0, 0.0, 0.0}, {-spacing / 2.0, 0.0, 0.0}};
  geometry.speed_of_sound = speed_of_sound;
  return geometry;
}

/// `num_mics` microphones evenly spaced on a circle in the xy plane.
inline ArrayGeometry make_ring_geometry(int num_mics, double radius,
                                        double speed_of_sound = 343.0) {
  ArrayGeometry geometry;
  geometry.speed_of_sound = speed_of_sound;
  geometry.mic_positions.reserve(static_cast<std::size_t>(num_mics));
  for (int i = 0; i < num_mics; ++i) {
    double angle = 2.0 * M_PI * i / num_mics;
    geometry.mic_positions.push_back({radius * std::cos(angle), radius * std::sin(angle), 0.0});
  }
  return geometry;
}

}  // namespace seld
