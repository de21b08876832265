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
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "seld/audio.hpp"
#include "seld/errors.hpp"
#include "seld/fft.hpp"
#include "seld/mel.hpp"
#include "seld/stft.hpp"

namespace seld {

enum class FeatureKind { MelGcc, SalsaLite, SalsaMel };

inline std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::MelGcc: return "mel-gcc";
    case FeatureKind::SalsaLite: return "salsa-lite";
    case FeatureKind::SalsaMel: return "salsa-mel";
  }
  return "unknown";
}

inline FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "mel-gcc") return FeatureKind::MelGcc;
  if (name == "salsa-lite") return FeatureKind::SalsaLite;
  if (name == "salsa-mel") return FeatureKind::SalsaMel;
  throw InvalidRange("unknown feature kind '" + name + "'");
}

/// Model-ready C x T x B feature stack. `channel_names` records what each
/// plane holds; `zero_lag_index` is set for stacks with a lag axis.
class FeatureTensor {
 public:
  FeatureTensor() = default;
  FeatureTensor(FeatureKind kind, std::size_t channels, std::size_t frames, std::size_t bins)
      : kind_(kind),
        channels_(channels),
        frames_(frames),
        bins_(bins),
        values_(channels * frames * bins, 0.0) {}

  FeatureKind kind() const { return kind_; }
  std::size_t num_channels() const { return channels_; }
  std::size_t num_frames() const { return frames_; }
  std::size_t num_bins() const { return bins_; }

  double& at(std::size_t c, std::size_t t, std::size_t b) {
    return values_[(c * frames_ + t) * bins_ + b];
  }
  double at(std::size_t c, std::size_t t, std::size_t b) const {
    return values_[(c * frames_ + t) * bins_ + b];
  }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  std::vector<std::string> channel_names;
  int zero_lag_index = -1;

 private:
  FeatureKind kind_{FeatureKind::SalsaLite};
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  std::vector<double> values_;
};

/// Cross-correlation lag axis parameters. The physical bound on usable lags
/// is fs * d_max / c samples; the output axis keeps num_lags lags centered on
/// zero (zero lag at index num_lags / 2, negative lags first).
struct GccConfig {
  ArrayGeometry geometry = make_tetrahedral_geometry();
  int num_lags = 128;

  double max_physical_lag_samples(int sample_rate_hz) const {
    return geometry.max_lag_samples(sample_rate_hz);
  }
};

/// Phase-difference feature parameters.
struct SalsaConfig {
  int cutoff_bins = 191;
  double speed_of_sound = 343.0;
  double log_floor = 1e-10;
  // Optional bound on phase-difference path lengths (meters) applied before
  // mel projection; disabled by default so pure-delay tests see raw values.
  bool clip_nipd = false;
  double clip_bound_m = 2.0 * 0.084;
};

/// Log-power mel spectrogram per channel: log(|X|^2 . W + eps).
/// Returns M planes of T x K values.
inline std::vector<std::vector<double>> mel_spectrogram(const ComplexSpectrogram& spec,
                                                        const MelFilterbank& bank,
                                                        double log_floor = 1e-10) {
  if (bank.num_bins() != static_cast<int>(spec.num_bins())) {
    throw DimensionMismatch("filterbank expects " + std::to_string(bank.num_bins()) +
                            " bins, spectrogram has " + std::to_string(spec.num_bins()));
  }
  const std::size_t frames = spec.num_frames();
  const std::size_t bins = spec.num_bins();
  const std::size_t bands = static_cast<std::size_t>(bank.num_bands());
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(spec.num_channels()));
  std::vector<double> power(frames * bins);
  for (int ch = 0; ch < spec.num_channels(); ++ch) {
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t f = 0; f < bins; ++f) {
        power[t * bins + f] = std::norm(spec.at(ch, t, f));
      }
    }
    std::vector<double> mel = apply_mel(power, frames, bank);
    for (std::size_t i = 0; i < frames * bands; ++i) mel[i] = std::log(mel[i] + log_floor);
    out.push_back(std::move(mel));
  }
  return out;
}

/// Whitened cross-correlation per microphone pair.
///
/// For each unordered pair (i, j), i < j, the cross-spectrum conj(X_i) * X_j
/// is normalized to unit magnitude per bin (bins with zero magnitude stay
/// zero, so silence yields an all-zero plane) and inverse transformed. The
/// lag axis holds num_lags lags with zero lag at index num_lags / 2 and
/// negative lags first; a peak at positive lag means channel j lags i.
/// Returns P = M(M-1)/2 planes of T x num_lags values in pair order
/// (0,1), (0,2), ..., (M-2,M-1).
inline std::vector<std::vector<double>> gcc_phat(const ComplexSpectrogram& spec,
                                                 const GccConfig& config) {
  const int m = spec.num_channels();
  if (m < 2) throw TooFewChannels("cross-correlation needs >= 2 channels");
  const std::size_t frames = spec.num_frames();
  const std::size_t bins = spec.num_bins();
  const std::size_t fft_size = static_cast<std::size_t>(spec.config().fft_size);
  const int num_lags = config.num_lags;
  const int half = num_lags / 2;

  const Radix2Fft fft(fft_size);
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  std::vector<std::complex<double>> whitened(fft_size);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      std::vector<double> plane(frames * static_cast<std::size_t>(num_lags), 0.0);
      for (std::size_t t = 0; t < frames; ++t) {
        std::fill(whitened.begin(), whitened.end(), std::complex<double>{});
        for (std::size_t f = 0; f < bins; ++f) {
          const std::complex<double> cross = std::conj(spec.at(i, t, f)) * spec.at(j, t, f);
          const double mag = std::abs(cross);
          if (mag > 0.0) {
            const std::complex<double> w = cross / mag;
            whitened[f] = w;
            if (f != 0 && f != fft_size / 2) whitened[fft_size - f] = std::conj(w);
          }
        }
        fft.inverse(whitened);
        double* row = plane.data() + t * static_cast<std::size_t>(num_lags);
        for (int idx = 0; idx < num_lags; ++idx) {
          const int lag = idx - half;
          const std::size_t src = static_cast<std::size_t>(
              (lag + static_cast<int>(fft_size)) % static_cast<int>(fft_size));
          row[idx] = whitened[src].real();
        }
      }
      out.push_back(std::move(plane));
    }
  }
  return out;
}

/// Phase differences against the first channel, scaled to path-length
/// differences in meters: -(c / 2 pi f) * arg(X_m * conj(X_1)). The DC bin
/// carries no delay information and is defined as 0. Returns M-1 planes of
/// T x cutoff_bins values for channels 2..M.
inline std::vector<std::vector<double>> nipd(const ComplexSpectrogram& spec,
                                             const SalsaConfig& config) {
  const int m = spec.num_channels();
  if (m < 2) throw TooFewChannels("phase differences need >= 2 channels");
  const std::size_t cutoff = static_cast<std::size_t>(config.cutoff_bins);
  if (cutoff > spec.num_bins()) {
    throw DimensionMismatch("cutoff_bins " + std::to_string(cutoff) + " exceeds " +
                            std::to_string(spec.num_bins()) + " spectrogram bins");
  }
  const std::size_t frames = spec.num_frames();
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(m) - 1);
  for (int ch = 1; ch < m; ++ch) {
    std::vector<double> plane(frames * cutoff, 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t f = 1; f < cutoff; ++f) {
        const std::complex<double> cross = spec.at(ch, t, f) * std::conj(spec.at(0, t, f));
        const double freq_hz = spec.config().bin_hz(static_cast<int>(f));
        plane[t * cutoff + f] =
            -(config.speed_of_sound / (2.0 * M_PI * freq_hz)) * std::arg(cross);
      }
    }
    out.push_back(std::move(plane));
  }
  return out;
}

namespace detail {

inline void copy_plane(FeatureTensor& tensor, std::size_t channel,
                       const std::vector<double>& plane) {
  const std::size_t frames = tensor.num_frames();
  const std::size_t bins = tensor.num_bins();
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t b = 0; b < bins; ++b) tensor.at(channel, t, b) = plane[t * bins + b];
  }
}

}  // namespace detail

/// Log-power spectrograms stacked with phase-difference maps, both truncated
/// to cutoff_bins. Shape: (2M - 1) x T x cutoff_bins.
inline FeatureTensor salsa_lite(const MultichannelAudio& audio, const SalsaConfig& config,
                                const StftConfig& stft_config = {}) {
  const ComplexSpectrogram spec = stft(audio, stft_config);
  const int m = spec.num_channels();
  if (m < 2) throw TooFewChannels("salsa-lite needs >= 2 channels");
  const std::size_t frames = spec.num_frames();
  const std::size_t cutoff = static_cast<std::size_t>(config.cutoff_bins);
  if (cutoff > spec.num_bins()) {
    throw DimensionMismatch("cutoff_bins exceeds spectrogram bins");
  }

  FeatureTensor tensor(FeatureKind::SalsaLite, static_cast<std::size_t>(2 * m - 1), frames,
                       cutoff);
  for (int ch = 0; ch < m; ++ch) {
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t f = 0; f < cutoff; ++f) {
        tensor.at(static_cast<std::size_t>(ch), t, f) =
            std::log(std::norm(spec.at(ch, t, f)) + config.log_floor);
      }
    }
    tensor.channel_names.push_back("log_power_ch" + std::to_string(ch));
  }
  const auto phase_planes = nipd(spec, config);
  for (std::size_t p = 0; p < phase_planes.size(); ++p) {
    detail::copy_plane(tensor, static_cast<std::size_t>(m) + p, phase_planes[p]);
    tensor.channel_names.push_back("nipd_ch" + std::to_string(p + 1) + "_ref0");
  }
  return tensor;
}

/// Mel-projected variant: mel log-power spectrograms stacked with
/// mel-projected phase-difference maps (projection over all F bins).
/// Shape: (2M - 1) x T x K.
inline FeatureTensor salsa_mel(const MultichannelAudio& audio, const SalsaConfig& config,
                               const MelFilterbank& bank, const StftConfig& stft_config = {}) {
  const ComplexSpectrogram spec = stft(audio, stft_config);
  const int m = spec.num_channels();
  if (m < 2) throw TooFewChannels("salsa-mel needs >= 2 channels");
  const std::size_t frames = spec.num_frames();
  const std::size_t bands = static_cast<std::size_t>(bank.num_bands());

  FeatureTensor tensor(FeatureKind::SalsaMel, static_cast<std::size_t>(2 * m - 1), frames,
                       bands);
  const auto mel_planes = mel_spectrogram(spec, bank, config.log_floor);
  for (std::size_t ch = 0; ch < mel_planes.size(); ++ch) {
    detail::copy_plane(tensor, ch, mel_planes[ch]);
    tensor.channel_names.push_back("mel_log_power_ch" + std::to_string(ch));
  }

  SalsaConfig full_band = config;
  full_band.cutoff_bins = static_cast<int>(spec.num_bins());
  auto phase_planes = nipd(spec, full_band);
  for (std::size_t p = 0; p < phase_planes.size(); ++p) {
    if (config.clip_nipd) {
      for (auto& v : phase_planes[p]) {
        v = std::clamp(v, -config.clip_bound_m, config.clip_bound_m);
      }
    }
    std::vector<double> mel = apply_mel(phase_planes[p], frames, bank);
    detail::copy_plane(tensor, static_cast<std::size_t>(m) + p, mel);
    tensor.channel_names.push_back("mel_nipd_ch" + std::to_string(p + 1) + "_ref0");
  }
  return tensor;
}

/// Mel spectrograms stacked with whitened cross-correlation lag maps; the lag
/// count equals the mel band count so the planes share one T x K shape.
/// Shape: (M + M(M-1)/2) x T x K.
inline FeatureTensor mel_gcc(const MultichannelAudio& audio, const MelFilterbank& bank,
                             const GccConfig& config, const StftConfig& stft_config = {},
                             double log_floor = 1e-10) {
  const ComplexSpectrogram spec = stft(audio, stft_config);
  const int m = spec.num_channels();
  if (m < 2) throw TooFewChannels("mel-gcc needs >= 2 channels");
  if (config.num_lags != bank.num_bands()) {
    throw DimensionMismatch("lag count " + std::to_string(config.num_lags) +
                            " must equal mel band count " + std::to_string(bank.num_bands()));
  }
  const std::size_t frames = spec.num_frames();
  const std::size_t bands = static_cast<std::size_t>(bank.num_bands());
  const std::size_t pairs = static_cast<std::size_t>(m) * (m - 1) / 2;

  FeatureTensor tensor(FeatureKind::MelGcc, static_cast<std::size_t>(m) + pairs, frames, bands);
  tensor.zero_lag_index = config.num_lags / 2;
  const auto mel_planes = mel_spectrogram(spec, bank, log_floor);
  for (std::size_t ch = 0; ch < mel_planes.size(); ++ch) {
    detail::copy_plane(tensor, ch, mel_planes[ch]);
    tensor.channel_names.push_back("mel_log_power_ch" + std::to_string(ch));
  }
  const auto gcc_planes = gcc_phat(spec, config);
  std::size_t plane_index = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j, ++plane_index) {
      detail::copy_plane(tensor, static_cast<std::size_t>(m) + plane_index,
                         gcc_planes[plane_index]);
      tensor.channel_names.push_back("gcc_pair" + std::to_string(i) + "_" + std::to_string(j));
    }
  }
  return tensor;
}

/// Everything needed to turn a window of audio into one feature tensor.
struct FeatureConfig {
  AudioFormat format{};
  ArrayGeometry geometry = make_tetrahedral_geometry();
  StftConfig stft{};
  int mel_bands = 128;
  double mel_fmin_hz = 0.0;
  double mel_fmax_hz = -1.0;  // -1 means Nyquist
  SalsaConfig salsa{};
  int gcc_lags = 128;

  MelFilterbank make_filterbank() const {
    return mel_filterbank(stft, mel_bands, mel_fmin_hz, mel_fmax_hz);
  }
  GccConfig make_gcc_config() const { return GccConfig{geometry, gcc_lags}; }

  /// Output bin count for a given feature kind.
  std::size_t feature_bins(FeatureKind kind) const {
    return kind == FeatureKind::SalsaLite ? static_cast<std::size_t>(salsa.cutoff_bins)
                                          : static_cast<std::size_t>(mel_bands);
  }
  /// Output channel count for a given feature kind and M input channels.
  std::size_t feature_channels(FeatureKind kind) const {
    const std::size_t m = static_cast<std::size_t>(format.num_channels);
    return kind == FeatureKind::MelGcc ? m + m * (m - 1) / 2 : 2 * m - 1;
  }
};

/// Dispatches to the requested feature stack. A cached filterbank can be
/// passed to avoid rebuilding it per window.
inline FeatureTensor extract_features(const MultichannelAudio& audio, FeatureKind kind,
                                      const FeatureConfig& config,
                                      const MelFilterbank* cached_bank = nullptr) {
  switch (kind) {
    case FeatureKind::SalsaLite:
      return salsa_lite(audio, config.salsa, config.stft);
    case FeatureKind::SalsaMel: {
      MelFilterbank local;
      if (!cached_bank) local = config.make_filterbank();
      return salsa_mel(audio, config.salsa, cached_bank ? *cached_bank : local, config.stft);
    }
    case FeatureKind::MelGcc: {
      MelFilterbank local;
      if (!cached_bank) local = config.make_filterbank();
      return mel_gcc(audio, cached_bank ? *cached_bank : local, config.make_gcc_config(),
                     config.stft, config.salsa.log_floor);
    }
  }
  throw InvalidRange("unknown feature kind");
}

}  // namespace seld
