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

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "seld/mel.hpp"
#include "seld/simulate.hpp"
#include "seld/stft.hpp"
#include "test_support.hpp"

using namespace seld;

namespace {

// Direct O(N^2) DFT, the oracle for the fast transform path.
std::vector<std::complex<double>> direct_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = -2.0 * M_PI * static_cast<double>(k * i) / static_cast<double>(n);
      sum += x[i] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = sum;
  }
  return out;
}

}  // namespace

TEST_CASE("stft frame counts", "[dsp][stft]") {
  StftConfig config;

  SECTION("two seconds at 24 kHz give 160 frames") {
    AudioFormat format{24000, 4};
    MultichannelAudio audio = test::noise_audio(format, 48000, 1);
    ComplexSpectrogram spec = stft(audio, config);
    REQUIRE(spec.num_frames() == 160);
    REQUIRE(spec.num_bins() == 257);
    REQUIRE(spec.num_channels() == 4);
  }

  SECTION("frame count is ceil(N / hop)") {
    for (std::size_t n : {std::size_t{1}, std::size_t{299}, std::size_t{300},
                          std::size_t{48000}, std::size_t{48001}}) {
      const std::size_t expected = (n + 299) / 300;
      REQUIRE(stft_num_frames(n, config) == expected);
      AudioFormat format{24000, 1};
      MultichannelAudio audio = test::noise_audio(format, n, n);
      REQUIRE(stft(audio, config).num_frames() == expected);
    }
  }

  SECTION("empty input is rejected") {
    MultichannelAudio audio(AudioFormat{24000, 1}, 0);
    REQUIRE_THROWS_AS(stft(audio, config), EmptyInput);
  }
}

TEST_CASE("stft values", "[dsp][stft]") {
  StftConfig config;
  AudioFormat format{24000, 1};

  SECTION("all-zero input gives an all-zero spectrogram") {
    MultichannelAudio audio(format, 24000);
    ComplexSpectrogram spec = stft(audio, config);
    for (std::size_t t = 0; t < spec.num_frames(); ++t) {
      for (std::size_t f = 0; f < spec.num_bins(); ++f) {
        REQUIRE(std::abs(spec.at(0, t, f)) == 0.0);
      }
    }
  }

  SECTION("pure tone at a bin center peaks at that bin and matches a direct DFT") {
    const int bin = 40;
    const double freq = bin * 24000.0 / 512.0;
    MultichannelAudio audio(format, 24000);
    auto tone = sine_tone(24000, freq, 24000, 0.8);
    std::copy(tone.begin(), tone.end(), audio.channel(0).begin());
    ComplexSpectrogram spec = stft(audio, config);

    const std::size_t t = 40;  // interior frame
    std::size_t argmax = 0;
    double best = -1.0;
    for (std::size_t f = 0; f < spec.num_bins(); ++f) {
      if (std::abs(spec.at(0, t, f)) > best) {
        best = std::abs(spec.at(0, t, f));
        argmax = f;
      }
    }
    REQUIRE(argmax == static_cast<std::size_t>(bin));

    // Rebuild the same windowed frame by hand and compare to a direct DFT.
    auto window = hann_window(512);
    std::vector<double> frame(512);
    for (int k = 0; k < 512; ++k) {
      frame[static_cast<std::size_t>(k)] =
          tone[static_cast<std::size_t>(static_cast<long long>(t) * 300 + k - 256)] *
          window[static_cast<std::size_t>(k)];
    }
    auto reference = direct_dft(frame);
    for (std::size_t f = 0; f < spec.num_bins(); ++f) {
      REQUIRE(std::abs(spec.at(0, t, f) - reference[f]) < 1e-8);
    }
  }

  SECTION("energy in an interior frame matches the windowed signal (Parseval)") {
    MultichannelAudio audio = test::noise_audio(format, 24000, 17);
    ComplexSpectrogram spec = stft(audio, config);
    auto window = hann_window(512);
    const std::size_t t = 30;
    double time_energy = 0.0;
    for (int k = 0; k < 512; ++k) {
      const double v = audio.at(0, static_cast<std::size_t>(
                                       static_cast<long long>(t) * 300 + k - 256)) *
                       window[static_cast<std::size_t>(k)];
      time_energy += v * v;
    }
    double spec_energy = std::norm(spec.at(0, t, 0)) + std::norm(spec.at(0, t, 256));
    for (std::size_t f = 1; f < 256; ++f) spec_energy += 2.0 * std::norm(spec.at(0, t, f));
    spec_energy /= 512.0;
    REQUIRE(spec_energy == Catch::Approx(time_energy).epsilon(1e-6));
  }

  SECTION("stft is linear") {
    MultichannelAudio x = test::noise_audio(format, 6000, 21);
    MultichannelAudio y = test::noise_audio(format, 6000, 22);
    const double a = 1.7, b = -0.4;
    MultichannelAudio combo(format, 6000);
    for (std::size_t n = 0; n < 6000; ++n) {
      combo.at(0, n) = a * x.at(0, n) + b * y.at(0, n);
    }
    ComplexSpectrogram sx = stft(x, config), sy = stft(y, config), sc = stft(combo, config);
    for (std::size_t t = 0; t < sc.num_frames(); t += 3) {
      for (std::size_t f = 0; f < sc.num_bins(); f += 7) {
        const auto expected = a * sx.at(0, t, f) + b * sy.at(0, t, f);
        REQUIRE(std::abs(sc.at(0, t, f) - expected) < 1e-9);
      }
    }
  }
}

TEST_CASE("mel filterbank construction", "[dsp][mel]") {
  StftConfig config;

  SECTION("all weights non-negative and every column sum positive at K=128") {
    MelFilterbank bank = mel_filterbank(config, 128, 0.0, 12000.0);
    REQUIRE(bank.num_bins() == 257);
    REQUIRE(bank.num_bands() == 128);
    for (int k = 0; k < 128; ++k) {
      double sum = 0.0;
      for (int f = 0; f < 257; ++f) {
        REQUIRE(bank.weight(f, k) >= 0.0);
        sum += bank.weight(f, k);
      }
      REQUIRE(sum > 0.0);
    }
  }

  SECTION("columns have contiguous non-zero support") {
    MelFilterbank bank = mel_filterbank(config, 128, 0.0, 12000.0);
    for (int k = 0; k < 128; ++k) {
      int first = -1, last = -1;
      for (int f = 0; f < 257; ++f) {
        if (bank.weight(f, k) > 0.0) {
          if (first < 0) first = f;
          last = f;
        }
      }
      REQUIRE(first >= 0);
      for (int f = first; f <= last; ++f) REQUIRE(bank.weight(f, k) > 0.0);
    }
  }

  SECTION("K=1 spans the whole band as a single triangle") {
    MelFilterbank bank = mel_filterbank(config, 1, 0.0, 12000.0);
    double sum = 0.0;
    for (int f = 0; f < 257; ++f) sum += bank.weight(f, 0);
    REQUIRE(sum > 0.0);
    // Peak near the band center, tails near the edges.
    REQUIRE(bank.center_hz(0) == Catch::Approx(mel_to_hz(hz_to_mel(12000.0) / 2.0)));
    REQUIRE(bank.weight(0, 0) < bank.weight(100, 0));
    REQUIRE(bank.weight(256, 0) < bank.weight(100, 0));
  }

  SECTION("band centers match independently recomputed mel breakpoints") {
    MelFilterbank bank = mel_filterbank(config, 128, 0.0, 12000.0);
    // Recompute the mel-scale breakpoints from the formula.
    const double mel_max = 2595.0 * std::log10(1.0 + 12000.0 / 700.0);
    double previous = -1.0;
    for (int k = 0; k < 128; ++k) {
      const double mel = mel_max * (k + 1) / 129.0;
      const double hz = 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
      REQUIRE(bank.center_hz(k) == Catch::Approx(hz).margin(1e-9));
      REQUIRE(bank.center_hz(k) > previous);
      previous = bank.center_hz(k);
    }
  }

  SECTION("invalid ranges are rejected") {
    REQUIRE_THROWS_AS(mel_filterbank(config, 0, 0.0, 12000.0), InvalidRange);
    REQUIRE_THROWS_AS(mel_filterbank(config, 128, -1.0, 12000.0), InvalidRange);
    REQUIRE_THROWS_AS(mel_filterbank(config, 128, 5000.0, 4000.0), InvalidRange);
    REQUIRE_THROWS_AS(mel_filterbank(config, 128, 0.0, 13000.0), InvalidRange);
  }
}

TEST_CASE("mel projection", "[dsp][mel]") {
  StftConfig config;
  MelFilterbank bank = mel_filterbank(config, 128, 0.0, 12000.0);

  SECTION("zero matrix maps to zero") {
    std::vector<double> zeros(3 * 257, 0.0);
    auto out = apply_mel(zeros, 3, bank);
    for (double v : out) REQUIRE(v == 0.0);
  }

  SECTION("a single-bin row picks out that filterbank row") {
    std::vector<double> row(257, 0.0);
    row[80] = 1.0;
    auto out = apply_mel(row, 1, bank);
    for (int k = 0; k < 128; ++k) REQUIRE(out[static_cast<std::size_t>(k)] == bank.weight(80, k));
  }

  SECTION("random matrix matches a naive triple loop to 1e-12") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> matrix(3 * 257);
    for (auto& v : matrix) v = dist(rng);
    auto out = apply_mel(matrix, 3, bank);
    for (std::size_t t = 0; t < 3; ++t) {
      for (int k = 0; k < 128; ++k) {
        double sum = 0.0;
        for (int f = 0; f < 257; ++f) sum += matrix[t * 257 + static_cast<std::size_t>(f)] *
                                              bank.weight(f, k);
        REQUIRE(out[t * 128 + static_cast<std::size_t>(k)] == Catch::Approx(sum).margin(1e-12));
      }
    }
  }

  SECTION("non-negative input stays non-negative") {
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> dist(0.0, 2.0);
    std::vector<double> matrix(2 * 257);
    for (auto& v : matrix) v = dist(rng);
    for (double v : apply_mel(matrix, 2, bank)) REQUIRE(v >= 0.0);
  }

  SECTION("projection is linear") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(2 * 257), y(2 * 257), combo(2 * 257);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = dist(rng);
      y[i] = dist(rng);
      combo[i] = 2.5 * x[i] - 0.75 * y[i];
    }
    auto out_x = apply_mel(x, 2, bank);
    auto out_y = apply_mel(y, 2, bank);
    auto out_combo = apply_mel(combo, 2, bank);
    for (std::size_t i = 0; i < out_combo.size(); ++i) {
      REQUIRE(out_combo[i] ==
              Catch::Approx(2.5 * out_x[i] - 0.75 * out_y[i]).margin(1e-12));
    }
  }

  SECTION("dimension mismatch is rejected") {
    std::vector<double> bad(3 * 100, 0.0);
    REQUIRE_THROWS_AS(apply_mel(bad, 3, bank), DimensionMismatch);
  }
}
