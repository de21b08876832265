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
#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <vector>

#include "seld/audio.hpp"
#include "seld/errors.hpp"
#include "seld/fft.hpp"

namespace seld {

/// Uniform white noise in [-amplitude, amplitude], reproducible from seed.
inline std::vector<double> white_noise(std::size_t num_samples, std::uint64_t seed,
                                       double amplitude = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  std::vector<double> out(num_samples);
  for (auto& v : out) v = dist(rng);
  return out;
}

inline std::vector<double> sine_tone(std::size_t num_samples, double frequency_hz,
                                     int sample_rate_hz, double amplitude = 0.5) {
  std::vector<double> out(num_samples);
  for (std::size_t n = 0; n < num_samples; ++n) {
    out[n] = amplitude * std::sin(2.0 * M_PI * frequency_hz * static_cast<double>(n) /
                                  sample_rate_hz);
  }
  return out;
}

namespace detail {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Circularly delays `padded` (length P, power of two) by a fractional number
// of samples via a frequency-domain phase ramp. Exact for band-limited input.
inline void fractional_delay_inplace(std::vector<std::complex<double>>& padded,
                                     double delay_samples, const Radix2Fft& fft) {
  const std::size_t p = padded.size();
  fft.forward(padded);
  for (std::size_t k = 0; k < p; ++k) {
    // Signed bin frequency keeps the result real for fractional delays.
    const double freq = (k <= p / 2) ? static_cast<double>(k)
                                     : static_cast<double>(k) - static_cast<double>(p);
    if (k == p / 2) {
      padded[k] *= std::cos(M_PI * delay_samples);
    } else {
      const double phase = -2.0 * M_PI * freq * delay_samples / static_cast<double>(p);
      padded[k] *= std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }
  fft.inverse(padded);
}

}  // namespace detail

/// Far-field plane wave from direction `doa` (unit vector pointing from the
/// array toward the source). Channel i is the source delayed by
/// -(p_i . doa) / c seconds; microphones closer to the source receive the
/// wavefront earlier. Fractional delays use band-limited interpolation.
inline MultichannelAudio simulate_plane_wave(const std::vector<double>& source,
                                             const std::array<double, 3>& doa,
                                             const ArrayGeometry& geometry,
                                             const AudioFormat& format) {
  const double norm = std::sqrt(doa[0] * doa[0] + doa[1] * doa[1] + doa[2] * doa[2]);
  if (std::abs(norm - 1.0) > 1e-6) {
    throw NonUnitDirection("doa norm is " + std::to_string(norm));
  }
  if (geometry.num_mics() != format.num_channels) {
    throw ChannelMismatch("geometry has " + std::to_string(geometry.num_mics()) +
                          " mics, format expects " + std::to_string(format.num_channels));
  }

  const int m = geometry.num_mics();
  std::vector<double> delay_samples(static_cast<std::size_t>(m));
  double max_abs_delay = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto& p = geometry.mic_positions[static_cast<std::size_t>(i)];
    const double tau = -(p[0] * doa[0] + p[1] * doa[1] + p[2] * doa[2]) / geometry.speed_of_sound;
    delay_samples[static_cast<std::size_t>(i)] = tau * format.sample_rate_hz;
    max_abs_delay = std::max(max_abs_delay, std::abs(delay_samples[static_cast<std::size_t>(i)]));
  }

  const std::size_t margin = static_cast<std::size_t>(std::ceil(max_abs_delay)) + 8;
  const std::size_t padded_len = detail::next_pow2(source.size() + 2 * margin);
  const Radix2Fft fft(padded_len);

  MultichannelAudio out(format, source.size());
  std::vector<std::complex<double>> padded(padded_len);
  for (int i = 0; i < m; ++i) {
    std::fill(padded.begin(), padded.end(), std::complex<double>{});
    for (std::size_t n = 0; n < source.size(); ++n) padded[margin + n] = {source[n], 0.0};
    detail::fractional_delay_inplace(padded, delay_samples[static_cast<std::size_t>(i)], fft);
    auto dst = out.channel(i);
    for (std::size_t n = 0; n < source.size(); ++n) dst[n] = padded[margin + n].real();
  }
  return out;
}

}  // namespace seld
