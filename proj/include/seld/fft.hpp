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
#include <span>
#include <stdexcept>
#include <vector>

namespace seld {

/// Iterative radix-2 complex FFT with precomputed twiddles and bit-reversal
/// table. Power-of-two sizes only. Immutable after construction, so a plan
/// can be shared across threads.
class Radix2Fft {
 public:
  explicit Radix2Fft(std::size_t n) : n_(n) {
    if (n == 0 || (n & (n - 1)) != 0) {
      throw std::invalid_argument("FFT size must be a power of two");
    }
    bitrev_.resize(n);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < log2n; ++b) r |= ((i >> b) & 1u) << (log2n - 1 - b);
      bitrev_[i] = r;
    }
    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      double angle = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
  }

  std::size_t size() const { return n_; }

  /// In-place forward transform: X[k] = sum_n x[n] e^{-2*pi*i*k*n/N}.
  void forward(std::span<std::complex<double>> data) const { transform(data, false); }

  /// In-place inverse transform with 1/N normalization.
  void inverse(std::span<std::complex<double>> data) const {
    transform(data, true);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v *= scale;
  }

 private:
  void transform(std::span<std::complex<double>> data, bool invert) const {
    if (data.size() != n_) throw std::invalid_argument("FFT buffer size mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
      std::size_t j = bitrev_[i];
      if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t step = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          std::complex<double> w = twiddles_[k * step];
          if (invert) w = std::conj(w);
          std::complex<double> even = data[start + k];
          std::complex<double> odd = data[start + k + half] * w;
          data[start + k] = even + odd;
          data[start + k + half] = even - odd;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddles_;
};

}  // namespace seld
