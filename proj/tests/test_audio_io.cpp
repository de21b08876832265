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

#include <atomic>
#include <fstream>
#include <random>
#include <thread>

#include "seld/audio.hpp"
#include "seld/capture.hpp"
#include "seld/simulate.hpp"
#include "seld/wav.hpp"
#include "test_support.hpp"

using namespace seld;
using seld::test::TempDir;

namespace {

std::vector<unsigned char> file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

AudioBlock make_block(const AudioFormat& format, std::size_t len, std::int64_t seq,
                      double value) {
  AudioBlock block{MultichannelAudio(format, len), seq};
  for (int ch = 0; ch < format.num_channels; ++ch) {
    for (auto& v : block.audio.channel(ch)) v = value;
  }
  return block;
}

}  // namespace

TEST_CASE("wav round trip and validation", "[audio_io][wav]") {
  TempDir dir;
  AudioFormat format{24000, 4};

  SECTION("digital silence reads back as zeros") {
    MultichannelAudio silence(format, 2400);
    write_wav(dir.file("silence.wav"), silence, WavEncoding::Float32);
    MultichannelAudio back = read_wav(dir.file("silence.wav"), format);
    REQUIRE(back.num_samples() == 2400);
    for (int ch = 0; ch < 4; ++ch) {
      for (double v : back.channel(ch)) REQUIRE(v == 0.0);
    }
  }

  SECTION("float32 write-read-write is byte identical") {
    MultichannelAudio audio = test::noise_audio(format, 4800, 7);
    write_wav(dir.file("a.wav"), audio, WavEncoding::Float32);
    MultichannelAudio back = read_wav(dir.file("a.wav"), format);
    write_wav(dir.file("b.wav"), back, WavEncoding::Float32);
    REQUIRE(file_bytes(dir.file("a.wav")) == file_bytes(dir.file("b.wav")));
  }

  SECTION("pcm16 round trip is lossy but close") {
    MultichannelAudio audio = test::noise_audio(format, 4800, 11);
    write_wav(dir.file("p.wav"), audio, WavEncoding::Pcm16);
    MultichannelAudio back = read_wav(dir.file("p.wav"), format);
    for (int ch = 0; ch < 4; ++ch) {
      for (std::size_t n = 0; n < back.num_samples(); ++n) {
        REQUIRE(back.at(ch, n) == Catch::Approx(audio.at(ch, n)).margin(1.0 / 32000.0));
      }
    }
  }

  SECTION("channel count mismatch is rejected") {
    MultichannelAudio stereo(AudioFormat{24000, 2}, 1000);
    write_wav(dir.file("stereo.wav"), stereo);
    REQUIRE_THROWS_AS(read_wav(dir.file("stereo.wav"), format), ChannelMismatch);
  }

  SECTION("sample rate mismatch is rejected, no resampling") {
    MultichannelAudio audio(AudioFormat{48000, 4}, 1000);
    write_wav(dir.file("fast.wav"), audio);
    REQUIRE_THROWS_AS(read_wav(dir.file("fast.wav"), format), SampleRateMismatch);
  }

  SECTION("garbage bytes are rejected") {
    std::ofstream out(dir.file("junk.wav"), std::ios::binary);
    out << "this is not audio";
    out.close();
    REQUIRE_THROWS_AS(read_wav(dir.file("junk.wav"), format), MalformedWav);
  }

  SECTION("missing file is rejected") {
    REQUIRE_THROWS_AS(read_wav(dir.file("missing.wav"), format), MalformedWav);
  }
}

TEST_CASE("block ring buffer basics", "[audio_io][ring]") {
  AudioFormat format{24000, 2};
  const std::size_t len = 24000;  // one second

  SECTION("one block into an empty two-slot buffer") {
    BlockRingBuffer buffer(2);
    buffer.push_block(make_block(format, len, 0, 0.5));
    REQUIRE(buffer.size() == 1);
    REQUIRE_THROWS_AS(buffer.latest_window(), InsufficientBlocks);
  }

  SECTION("pushing 0..3 into a two-slot buffer keeps blocks 2 and 3") {
    BlockRingBuffer buffer(2);
    for (int i = 0; i < 4; ++i) {
      buffer.push_block(make_block(format, len, i, static_cast<double>(i)));
    }
    REQUIRE(buffer.size() == 2);
    REQUIRE(buffer.newest_sequence() == 3);
    MultichannelAudio window = buffer.latest_window();
    REQUIRE(window.at(0, 0) == 2.0);
    REQUIRE(window.at(0, len) == 3.0);
  }

  SECTION("wrong block length is rejected") {
    BlockRingBuffer buffer(2);
    buffer.push_block(make_block(format, len, 0, 0.0));
    REQUIRE_THROWS_AS(buffer.push_block(make_block(format, len - 1, 1, 0.0)),
                      BlockLengthMismatch);
  }

  SECTION("window is the concatenation in time order") {
    BlockRingBuffer buffer(2);
    buffer.push_block(make_block(format, len, 0, 1.0));
    buffer.push_block(make_block(format, len, 1, 2.0));
    MultichannelAudio window = buffer.latest_window();
    REQUIRE(window.num_samples() == 48000);  // n * T_r at 24 kHz
    for (int ch = 0; ch < 2; ++ch) {
      REQUIRE(window.at(ch, 0) == 1.0);
      REQUIRE(window.at(ch, len - 1) == 1.0);
      REQUIRE(window.at(ch, len) == 2.0);
      REQUIRE(window.at(ch, 2 * len - 1) == 2.0);
    }
  }

  SECTION("evicting an unread block counts as dropped") {
    BlockRingBuffer buffer(2);
    buffer.push_block(make_block(format, len, 0, 0.0));
    buffer.push_block(make_block(format, len, 1, 0.0));
    REQUIRE(buffer.dropped_count() == 0);
    buffer.push_block(make_block(format, len, 2, 0.0));  // evicts unread block 0
    REQUIRE(buffer.dropped_count() == 1);
    (void)buffer.latest_window();  // reads blocks 1 and 2
    buffer.push_block(make_block(format, len, 3, 0.0));  // evicts read block 1
    REQUIRE(buffer.dropped_count() == 1);
  }
}

TEST_CASE("ring buffer windows stay consecutive under random push sequences",
          "[audio_io][ring][property]") {
  AudioFormat format{24000, 1};
  const std::size_t len = 100;
  std::mt19937 rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const int capacity = 1 + static_cast<int>(rng() % 4);
    BlockRingBuffer buffer(capacity);
    std::int64_t seq = 0;
    for (int step = 0; step < 50; ++step) {
      const int pushes = static_cast<int>(rng() % 3);
      for (int p = 0; p < pushes; ++p) {
        // Encode the sequence index in the samples to detect interleaving.
        buffer.push_block(make_block(format, len, seq, static_cast<double>(seq)));
        ++seq;
      }
      if (buffer.size() == static_cast<std::size_t>(capacity)) {
        MultichannelAudio window = buffer.latest_window();
        REQUIRE(window.num_samples() == len * static_cast<std::size_t>(capacity));
        const double newest = window.at(0, window.num_samples() - 1);
        for (int b = 0; b < capacity; ++b) {
          const double expected = newest - (capacity - 1 - b);
          REQUIRE(window.at(0, static_cast<std::size_t>(b) * len) == expected);
        }
      }
    }
  }
}

TEST_CASE("ring buffer supports one producer and one consumer", "[audio_io][ring][thread]") {
  AudioFormat format{24000, 1};
  const std::size_t len = 240;
  BlockRingBuffer buffer(2);
  constexpr int kBlocks = 300;

  std::thread producer([&] {
    for (int i = 0; i < kBlocks; ++i) {
      buffer.push_block(make_block(format, len, i, static_cast<double>(i)));
      std::this_thread::yield();
    }
    buffer.close();
  });

  std::int64_t last_seen = -1;
  int windows = 0;
  while (true) {
    auto window = buffer.wait_for_fresh_window(last_seen, std::chrono::milliseconds(50));
    if (!window) {
      if (buffer.closed()) break;
      continue;
    }
    auto& [audio, newest] = *window;
    REQUIRE(newest > last_seen);
    // Window halves must be two consecutive blocks.
    REQUIRE(audio.at(0, len) == static_cast<double>(newest));
    REQUIRE(audio.at(0, 0) == static_cast<double>(newest - 1));
    last_seen = newest;
    ++windows;
  }
  producer.join();
  REQUIRE(windows > 0);
  REQUIRE(last_seen <= kBlocks - 1);
}

TEST_CASE("plane wave simulation", "[audio_io][simulate]") {
  AudioFormat format{24000, 2};

  SECTION("all mics at origin produce identical channels") {
    ArrayGeometry geometry;
    geometry.mic_positions = {{0, 0, 0}, {0, 0, 0}};
    auto source = white_noise(4800, 3);
    auto audio = simulate_plane_wave(source, {1, 0, 0}, geometry, format);
    for (std::size_t n = 0; n < audio.num_samples(); ++n) {
      REQUIRE(audio.at(0, n) == Catch::Approx(audio.at(1, n)).margin(1e-12));
    }
  }

  SECTION("0.084 m pair along x resolves to about 5.88 samples of lag") {
    ArrayGeometry geometry = make_pair_geometry(0.084);
    auto source = white_noise(9600, 5);
    auto audio = simulate_plane_wave(source, {1, 0, 0}, geometry, format);
    // Channel 1 sits behind channel 0 along the propagation path.
    const double expected = 24000.0 * 0.084 / 343.0;  // 5.877...
    const int lag = test::xcorr_argmax(audio.channel(0), audio.channel(1), 10);
    REQUIRE(lag == static_cast<int>(std::lround(expected)));
  }

  SECTION("broadside direction gives zero interchannel delay") {
    ArrayGeometry geometry = make_pair_geometry(0.084);
    auto source = white_noise(9600, 6);
    auto audio = simulate_plane_wave(source, {0, 1, 0}, geometry, format);
    REQUIRE(test::xcorr_argmax(audio.channel(0), audio.channel(1), 10) == 0);
  }

  SECTION("delay does not change channel energy by more than 1%") {
    ArrayGeometry geometry = make_tetrahedral_geometry();
    AudioFormat quad{24000, 4};
    auto source = white_noise(24000, 9);
    const double source_energy = test::channel_energy(source);
    auto audio = simulate_plane_wave(source, {0, 0, 1}, geometry, quad);
    for (int ch = 0; ch < 4; ++ch) {
      REQUIRE(test::channel_energy(audio.channel(ch)) ==
              Catch::Approx(source_energy).epsilon(0.01));
    }
  }

  SECTION("non-unit direction is rejected") {
    ArrayGeometry geometry = make_pair_geometry(0.084);
    auto source = white_noise(2400, 1);
    REQUIRE_THROWS_AS(simulate_plane_wave(source, {1, 1, 0}, geometry, format),
                      NonUnitDirection);
  }

  SECTION("cross-correlation recovers analytic integer delays up to the bound") {
    // Spacing chosen so each direction along the axis gives an integer lag.
    for (int d = 1; d <= 5; ++d) {
      const double spacing = d * 343.0 / 24000.0;
      ArrayGeometry geometry = make_pair_geometry(spacing);
      auto source = white_noise(9600, 100 + static_cast<std::uint64_t>(d));
      auto audio = simulate_plane_wave(source, {1, 0, 0}, geometry, format);
      REQUIRE(test::xcorr_argmax(audio.channel(0), audio.channel(1), 8) == d);
      auto flipped = simulate_plane_wave(source, {-1, 0, 0}, geometry, format);
      REQUIRE(test::xcorr_argmax(flipped.channel(0), flipped.channel(1), 8) == -d);
    }
  }
}

TEST_CASE("buffer block source slices consecutive blocks", "[audio_io][capture]") {
  AudioFormat format{24000, 2};
  MultichannelAudio audio = test::noise_audio(format, 24000 * 3 + 100, 42);
  BufferBlockSource source(audio, 1.0);
  for (int i = 0; i < 3; ++i) {
    auto block = source.next_block();
    REQUIRE(block.has_value());
    REQUIRE(block->sequence_index == i);
    REQUIRE(block->audio.num_samples() == 24000);
    REQUIRE(block->audio.at(0, 0) == audio.at(0, static_cast<std::size_t>(i) * 24000));
  }
  REQUIRE_FALSE(source.next_block().has_value());  // trailing partial block dropped
}

TEST_CASE("simulated capture device paces blocks in real time", "[audio_io][capture]") {
  AudioFormat format{24000, 1};
  MultichannelAudio audio = test::noise_audio(format, 2400 * 3, 1);
  SimulatedCaptureDevice device(audio, 0.1);
  const auto start = std::chrono::steady_clock::now();
  int count = 0;
  while (device.next_block()) ++count;
  const double elapsed = std::chrono::duration<double>(
      std::chrono::steady_clock::now() - start).count();
  REQUIRE(count == 3);
  REQUIRE(elapsed >= 0.3);
  REQUIRE(elapsed < 3.0);
}
