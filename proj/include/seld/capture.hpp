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
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include "seld/audio.hpp"
#include "seld/wav.hpp"

namespace seld {

/// Pull-based stream of capture blocks. next_block() returns nullopt once the
/// stream is exhausted; real-time implementations pace the caller.
class BlockSource {
 public:
  virtual ~BlockSource() = default;
  virtual std::optional<AudioBlock> next_block() = 0;
  virtual double block_seconds() const = 0;
  virtual const AudioFormat& format() const = 0;
};

/// Slices a fixed buffer into consecutive blocks as fast as the caller asks.
class BufferBlockSource : public BlockSource {
 public:
  BufferBlockSource(MultichannelAudio audio, double block_seconds)
      : audio_(std::move(audio)),
        block_seconds_(block_seconds),
        block_len_(block_length_samples(block_seconds, audio_.format().sample_rate_hz)) {}

  std::optional<AudioBlock> next_block() override {
    const std::size_t start = static_cast<std::size_t>(next_index_) * block_len_;
    if (start + block_len_ > audio_.num_samples()) return std::nullopt;
    AudioBlock block{MultichannelAudio(audio_.format(), block_len_), next_index_};
    for (int ch = 0; ch < audio_.num_channels(); ++ch) {
      auto src = audio_.channel(ch);
      auto dst = block.audio.channel(ch);
      std::copy(src.begin() + static_cast<std::ptrdiff_t>(start),
                src.begin() + static_cast<std::ptrdiff_t>(start + block_len_), dst.begin());
    }
    ++next_index_;
    return block;
  }

  double block_seconds() const override { return block_seconds_; }
  const AudioFormat& format() const override { return audio_.format(); }

 private:
  MultichannelAudio audio_;
  double block_seconds_;
  std::size_t block_len_;
  std::int64_t next_index_ = 0;
};

/// Replays prerecorded audio in real time: each next_block() call returns
/// after the corresponding block duration of wall clock has elapsed since the
/// stream started. Deadlines are absolute so pacing does not drift.
class SimulatedCaptureDevice : public BlockSource {
 public:
  SimulatedCaptureDevice(MultichannelAudio audio, double block_seconds)
      : inner_(std::move(audio), block_seconds) {}

  SimulatedCaptureDevice(const std::string& wav_path, const AudioFormat& expected,
                         double block_seconds)
      : inner_(read_wav(wav_path, expected), block_seconds) {}

  std::optional<AudioBlock> next_block() override {
    auto block = inner_.next_block();
    if (!block) return std::nullopt;
    if (!started_) {
      start_ = std::chrono::steady_clock::now();
      started_ = true;
    }
    const auto deadline =
        start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                     std::chrono::duration<double>((block->sequence_index + 1) *
                                                   inner_.block_seconds()));
    std::this_thread::sleep_until(deadline);
    return block;
  }

  double block_seconds() const override { return inner_.block_seconds(); }
  const AudioFormat& format() const override { return inner_.format(); }

 private:
  BufferBlockSource inner_;
  bool started_ = false;
  std::chrono::steady_clock::time_point start_{};
};

}  // namespace seld
