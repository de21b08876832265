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
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "seld/errors.hpp"
#include "seld/stft.hpp"

namespace seld {

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// F x K non-negative projection from linear frequency bins onto mel bands.
class MelFilterbank {
 public:
  MelFilterbank() = default;
  MelFilterbank(int num_bins, int num_bands, double f_min_hz, double f_max_hz)
      : num_bins_(num_bins),
        num_bands_(num_bands),
        f_min_hz_(f_min_hz),
        f_max_hz_(f_max_hz),
        weights_(static_cast<std::size_t>(num_bins) * num_bands, 0.0),
        center_hz_(static_cast<std::size_t>(num_bands), 0.0) {}

  int num_bins() const { return num_bins_; }
  int num_bands() const { return num_bands_; }
  double f_min_hz() const { return f_min_hz_; }
  double f_max_hz() const { return f_max_hz_; }

  double weight(int bin, int band) const {
    return weights_[static_cast<std::size_t>(bin) * num_bands_ + band];
  }
  double& weight(int bin, int band) {
    return weights_[static_cast<std::size_t>(bin) * num_bands_ + band];
  }

  /// All band weights for one frequency bin.
  std::span<const double> bin_weights(int bin) const {
    return {weights_.data() + static_cast<std::size_t>(bin) * num_bands_,
            static_cast<std::size_t>(num_bands_)};
  }

  /// Peak (center) frequency of band k in Hz; strictly increasing with k.
  double center_hz(int band) const { return center_hz_[static_cast<std::size_t>(band)]; }
  double& center_hz(int band) { return center_hz_[static_cast<std::size_t>(band)]; }

 private:
  int num_bins_ = 0;
  int num_bands_ = 0;
  double f_min_hz_ = 0.0;
  double f_max_hz_ = 0.0;
  std::vector<double> weights_;  // [bin * num_bands + band]
  std::vector<double> center_hz_;
};

namespace detail {

// Integral of the unit-height triangle (left, center, right) over [a, b].
inline double triangle_integral(double left, double center, double right, double a, double b) {
  auto ramp_integral = [](double x0, double x1, double lo, double hi, bool rising) {
    // Linear ramp on [lo, hi]: 0 -> 1 when rising, 1 -> 0 otherwise.
    double a0 = std::max(x0, lo), b0 = std::min(x1, hi);
    if (b0 <= a0 || hi <= lo) return 0.0;
    double width = hi - lo;
    auto antiderivative = [&](double x) {
      double u = (x - lo) / width;
      return rising ? width * u * u / 2.0 : width * (u - u * u / 2.0);
    };
    return antiderivative(b0) - antiderivative(a0);
  };
  return ramp_integral(a, b, left, center, true) + ramp_integral(a, b, center, right, false);
}

}  // namespace detail

/// Builds triangular filters with centers uniformly spaced on the mel scale.
///
/// Each weight is the mean of the triangle over the FFT bin's frequency cell
/// rather than a point sample at the bin center; narrow low-frequency
/// triangles that fall between bin centers therefore keep nonzero support,
/// so every band has a positive column sum. No area normalization.
inline MelFilterbank mel_filterbank(const StftConfig& config, int num_bands,
                                    double f_min_hz = 0.0, double f_max_hz = -1.0) {
  if (f_max_hz < 0.0) f_max_hz = config.sample_rate_hz / 2.0;
  const double nyquist = config.sample_rate_hz / 2.0;
  if (num_bands < 1 || f_min_hz < 0.0 || f_min_hz >= f_max_hz || f_max_hz > nyquist) {
    throw InvalidRange("invalid mel range [" + std::to_string(f_min_hz) + ", " +
                       std::to_string(f_max_hz) + ") with " + std::to_string(num_bands) +
                       " bands");
  }

  const int num_bins = config.num_bins();
  MelFilterbank bank(num_bins, num_bands, f_min_hz, f_max_hz);

  const double mel_min = hz_to_mel(f_min_hz);
  const double mel_max = hz_to_mel(f_max_hz);
  std::vector<double> edges_hz(static_cast<std::size_t>(num_bands) + 2);
  for (int i = 0; i < num_bands + 2; ++i) {
    edges_hz[static_cast<std::size_t>(i)] =
        mel_to_hz(mel_min + (mel_max - mel_min) * i / (num_bands + 1));
  }

  const double bin_width = static_cast<double>(config.sample_rate_hz) / config.fft_size;
  for (int band = 0; band < num_bands; ++band) {
    const double left = edges_hz[static_cast<std::size_t>(band)];
    const double center = edges_hz[static_cast<std::size_t>(band) + 1];
    const double right = edges_hz[static_cast<std::size_t>(band) + 2];
    bank.center_hz(band) = center;
    for (int bin = 0; bin < num_bins; ++bin) {
      const double f = config.bin_hz(bin);
      const double cell_lo = std::max(f - bin_width / 2.0, 0.0);
      const double cell_hi = std::min(f + bin_width / 2.0, nyquist);
      bank.weight(bin, band) =
          detail::triangle_integral(left, center, right, cell_lo, cell_hi) / bin_width;
    }
  }
  return bank;
}

/// Dense projection: out[t][k] = sum_f in[t][f] * W[f][k].
/// `matrix` is row-major T x F; the result is row-major T x K.
inline std::vector<double> apply_mel(const std::vector<double>& matrix, std::size_t num_rows,
                                     const MelFilterbank& bank) {
  const std::size_t num_bins = static_cast<std::size_t>(bank.num_bins());
  const std::size_t num_bands = static_cast<std::size_t>(bank.num_bands());
  if (matrix.size() != num_rows * num_bins) {
    throw DimensionMismatch("matrix has " + std::to_string(matrix.size()) +
                            " values, expected " + std::to_string(num_rows * num_bins));
  }
  std::vector<double> out(num_rows * num_bands, 0.0);
  for (std::size_t t = 0; t < num_rows; ++t) {
    const double* row = matrix.data() + t * num_bins;
    double* out_row = out.data() + t * num_bands;
    for (std::size_t f = 0; f < num_bins; ++f) {
      const double v = row[f];
      if (v == 0.0) continue;
      auto w = bank.bin_weights(static_cast<int>(f));
      for (std::size_t k = 0; k < num_bands; ++k) out_row[k] += v * w[k];
    }
  }
  return out;
}

}  // namespace seld
