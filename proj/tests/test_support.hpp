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
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "seld/audio.hpp"

namespace seld::test {

/// Unique temp directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "seld_test") {
    std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            (prefix + "_" + std::to_string(rng() & 0xFFFFFFFF));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline seld::MultichannelAudio noise_audio(const seld::AudioFormat& format,
                                           std::size_t num_samples, std::uint64_t seed,
                                           double amplitude = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  seld::MultichannelAudio audio(format, num_samples);
  for (int ch = 0; ch < format.num_channels; ++ch) {
    for (auto& v : audio.channel(ch)) v = dist(rng);
  }
  return audio;
}

inline seld::MultichannelAudio constant_audio(const seld::AudioFormat& format,
                                              std::size_t num_samples, double value) {
  seld::MultichannelAudio audio(format, num_samples);
  for (int ch = 0; ch < format.num_channels; ++ch) {
    for (auto& v : audio.channel(ch)) v = value;
  }
  return audio;
}

/// Plain time-domain cross-correlation argmax over |lag| <= max_lag.
/// Positive result means b lags a.
inline int xcorr_argmax(std::span<const double> a, std::span<const double> b, int max_lag) {
  int best_lag = 0;
  double best = -1e300;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    double sum = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
      const long long m = static_cast<long long>(n) + lag;
      if (m < 0 || m >= static_cast<long long>(b.size())) continue;
      sum += a[n] * b[static_cast<std::size_t>(m)];
    }
    if (sum > best) {
      best = sum;
      best_lag = lag;
    }
  }
  return best_lag;
}

inline double channel_energy(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return sum;
}

}  // namespace seld::test
