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

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "seld/audio.hpp"
#include "seld/errors.hpp"
#include "seld/fft.hpp"

namespace seld {

/// Short-time transform parameters. The defaults give F = 257 frequency bins
/// and 80 frames per second at 24 kHz.
struct StftConfig {
  int fft_size = 512;
  int window_length = 512;
  int hop = 300;
  int sample_rate_hz = 24000;

  int num_bins() const { return fft_size / 2 + 1; }
  double bin_hz(int bin) const {
    return static_cast<double>(bin) * sample_rate_hz / fft_size;
  }

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

/// Frame count for an N-sample channel under centered framing.
inline std::size_t stft_num_frames(std::size_t num_samples, const StftConfig& config) {
  return (num_samples + config.hop - 1) / config.hop;
}

/// Complex M x T x F spectrogram.
class ComplexSpectrogram {
 public:
  ComplexSpectrogram() = default;
  ComplexSpectrogram(StftConfig config, int num_channels, std::size_t num_frames)
      : config_(config),
        num_channels_(num_channels),
        num_frames_(num_frames),
        num_bins_(static_cast<std::size_t>(config.num_bins())),
        values_(static_cast<std::size_t>(num_channels) * num_frames * num_bins_) {}

  const StftConfig& config() const { return config_; }
  int num_channels() const { return num_channels_; }
  std::size_t num_frames() const { return num_frames_; }
  std::size_t num_bins() const { return num_bins_; }

  std::complex<double>& at(int channel, std::size_t frame, std::size_t bin) {
    return values_[(static_cast<std::size_t>(channel) * num_frames_ + frame) * num_bins_ + bin];
  }
  const std::complex<double>& at(int channel, std::size_t frame, std::size_t bin) const {
    return values_[(static_cast<std::size_t>(channel) * num_frames_ + frame) * num_bins_ + bin];
  }

 private:
  StftConfig config_{};
  int num_channels_ = 0;
  std::size_t num_frames_ = 0;
  std::size_t num_bins_ = 0;
  std::vector<std::complex<double>> values_;
};

/// Periodic Hann window of length n.
inline std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  }
  return w;
}

namespace detail {

// Mirror index into [0, n) without repeating the edge sample.
inline std::size_t reflect_index(long long i, std::size_t n) {
  if (n == 1) return 0;
  const long long last = static_cast<long long>(n) - 1;
  while (i < 0 || i > last) {
    if (i < 0) i = -i;
    if (i > last) i = 2 * last - i;
  }
  return static_cast<std::size_t>(i);
}

}  // namespace detail

/// Windowed transform of every channel. Frames are centered on t * hop using
/// reflected padding of fft_size/2 samples, so T = ceil(N / hop).
inline ComplexSpectrogram stft(const MultichannelAudio& audio, const StftConfig& config = {}) {
  if (audio.num_samples() == 0 || audio.num_channels() == 0) {
    throw EmptyInput("stft input has no samples");
  }
  if (config.hop <= 0 || config.hop > config.window_length ||
      config.window_length > config.fft_size) {
    throw InvalidRange("need 0 < hop <= window length <= fft size");
  }
  const std::size_t n = audio.num_samples();
  const std::size_t num_frames = stft_num_frames(n, config);
  const int pad = config.fft_size / 2;
  const std::vector<double> window = hann_window(config.window_length);
  const Radix2Fft fft(static_cast<std::size_t>(config.fft_size));

  ComplexSpectrogram spec(config, audio.num_channels(), num_frames);
  std::vector<std::complex<double>> frame(static_cast<std::size_t>(config.fft_size));
  for (int ch = 0; ch < audio.num_channels(); ++ch) {
    auto samples = audio.channel(ch);
    for (std::size_t t = 0; t < num_frames; ++t) {
      for (int k = 0; k < config.fft_size; ++k) {
        double v = 0.0;
        if (k < config.window_length) {
          long long src = static_cast<long long>(t) * config.hop + k - pad;
          v = samples[detail::reflect_index(src, n)] * window[static_cast<std::size_t>(k)];
        }
        frame[static_cast<std::size_t>(k)] = {v, 0.0};
      }
      fft.forward(frame);
      for (std::size_t f = 0; f < spec.num_bins(); ++f) spec.at(ch, t, f) = frame[f];
    }
  }
  return spec;
}

}  // namespace seld
