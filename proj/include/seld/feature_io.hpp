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

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "seld/errors.hpp"
#include "seld/features.hpp"

namespace seld {

// Flat binary container: 8-byte magic, then kind/C/T/B as little-endian
// uint32, then C*T*B float32 values in (channel, frame, bin) order.
inline constexpr char kFeatureFileMagic[8] = {'S', 'E', 'L', 'D', 'F', 'T', '0', '1'};

namespace detail {

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32_le_stream(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace detail

inline void write_feature_tensor(const std::string& path, const FeatureTensor& tensor) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SeldError("cannot open " + path + " for writing");
  out.write(kFeatureFileMagic, sizeof kFeatureFileMagic);
  detail::write_u32_le(out, static_cast<std::uint32_t>(tensor.kind()));
  detail::write_u32_le(out, static_cast<std::uint32_t>(tensor.num_channels()));
  detail::write_u32_le(out, static_cast<std::uint32_t>(tensor.num_frames()));
  detail::write_u32_le(out, static_cast<std::uint32_t>(tensor.num_bins()));
  for (double v : tensor.values()) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof f);
    detail::write_u32_le(out, bits);
  }
  if (!out) throw SeldError("failed writing " + path);
}

inline FeatureTensor read_feature_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SeldError("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kFeatureFileMagic, sizeof magic) != 0) {
    throw SeldError(path + " is not a feature tensor file");
  }
  const auto kind = static_cast<FeatureKind>(detail::read_u32_le_stream(in));
  const std::uint32_t c = detail::read_u32_le_stream(in);
  const std::uint32_t t = detail::read_u32_le_stream(in);
  const std::uint32_t b = detail::read_u32_le_stream(in);
  if (!in) throw SeldError(path + ": truncated header");
  FeatureTensor tensor(kind, c, t, b);
  for (auto& v : tensor.values()) {
    std::uint32_t bits = detail::read_u32_le_stream(in);
    if (!in) throw SeldError(path + ": truncated data");
    float f;
    std::memcpy(&f, &bits, sizeof f);
    v = f;
  }
  return tensor;
}

/// Debug CSV: header row, then one row per (channel, frame) with all bins.
inline void write_feature_csv(const std::string& path, const FeatureTensor& tensor) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw SeldError("cannot open " + path + " for writing");
  out << "# kind=" << to_string(tensor.kind()) << " channels=" << tensor.num_channels()
      << " frames=" << tensor.num_frames() << " bins=" << tensor.num_bins() << "\n";
  out << std::setprecision(9);
  for (std::size_t c = 0; c < tensor.num_channels(); ++c) {
    for (std::size_t t = 0; t < tensor.num_frames(); ++t) {
      out << c << ',' << t;
      for (std::size_t b = 0; b < tensor.num_bins(); ++b) out << ',' << tensor.at(c, t, b);
      out << '\n';
    }
  }
}

}  // namespace seld
