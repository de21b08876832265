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
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "seld/audio.hpp"
#include "seld/errors.hpp"

namespace seld {

enum class WavEncoding { Pcm16, Float32 };

namespace detail {

inline std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16_le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void append_u32_le(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

inline void append_u16_le(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}

inline float float_from_bits_le(const unsigned char* p) {
  std::uint32_t bits = read_u32_le(p);
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

}  // namespace detail

/// Reads a PCM16 or float32 RIFF/WAVE file and normalizes samples to [-1, 1].
/// The file must match `expected` exactly; there is no resampling.
inline MultichannelAudio read_wav(const std::string& path, const AudioFormat& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedWav("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw MalformedWav(path + " is not a RIFF/WAVE file");
  }

  std::uint16_t format_tag = 0, num_channels = 0, bits_per_sample = 0;
  std::uint32_t sample_rate = 0;
  bool saw_fmt = false;
  std::size_t data_offset = 0, data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    std::uint32_t chunk_size = detail::read_u32_le(bytes.data() + pos + 4);
    std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) throw MalformedWav(path + ": truncated chunk");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw MalformedWav(path + ": fmt chunk too small");
      format_tag = detail::read_u16_le(bytes.data() + body);
      num_channels = detail::read_u16_le(bytes.data() + body + 2);
      sample_rate = detail::read_u32_le(bytes.data() + body + 4);
      bits_per_sample = detail::read_u16_le(bytes.data() + body + 14);
      saw_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_offset = body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }
  if (!saw_fmt || data_offset == 0) throw MalformedWav(path + ": missing fmt or data chunk");
  if (num_channels == 0) throw MalformedWav(path + ": zero channels");

  WavEncoding encoding;
  if (format_tag == 1 && bits_per_sample == 16) {
    encoding = WavEncoding::Pcm16;
  } else if (format_tag == 3 && bits_per_sample == 32) {
    encoding = WavEncoding::Float32;
  } else {
    throw MalformedWav(path + ": unsupported encoding (format " + std::to_string(format_tag) +
                       ", " + std::to_string(bits_per_sample) + " bits)");
  }
  if (static_cast<int>(num_channels) != expected.num_channels) {
    throw ChannelMismatch(path + " has " + std::to_string(num_channels) +
                          " channels, expected " + std::to_string(expected.num_channels));
  }
  if (static_cast<int>(sample_rate) != expected.sample_rate_hz) {
    throw SampleRateMismatch(path + " is " + std::to_string(sample_rate) + " Hz, expected " +
                             std::to_string(expected.sample_rate_hz) + " Hz");
  }

  const std::size_t bytes_per_sample = bits_per_sample / 8;
  const std::size_t frame_bytes = bytes_per_sample * num_channels;
  const std::size_t num_frames = data_size / frame_bytes;

  MultichannelAudio audio(expected, num_frames);
  const unsigned char* data = bytes.data() + data_offset;
  for (std::size_t n = 0; n < num_frames; ++n) {
    for (int ch = 0; ch < expected.num_channels; ++ch) {
      const unsigned char* p = data + n * frame_bytes + ch * bytes_per_sample;
      double v;
      if (encoding == WavEncoding::Pcm16) {
        std::int16_t raw = static_cast<std::int16_t>(detail::read_u16_le(p));
        v = raw / 32768.0;
      } else {
        v = detail::float_from_bits_le(p);
        v = std::clamp(v, -1.0, 1.0);
      }
      audio.at(ch, n) = v;
    }
  }
  return audio;
}

/// Writes interleaved PCM16 or float32 with a canonical 44-byte header.
inline void write_wav(const std::string& path, const MultichannelAudio& audio,
                      WavEncoding encoding = WavEncoding::Float32) {
  const int channels = audio.num_channels();
  const std::uint32_t sample_rate = static_cast<std::uint32_t>(audio.format().sample_rate_hz);
  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(audio.num_samples() * block_align);

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  auto append_tag = [&](const char* tag) { out.insert(out.end(), tag, tag + 4); };

  append_tag("RIFF");
  detail::append_u32_le(out, 36 + data_size);
  append_tag("WAVE");
  append_tag("fmt ");
  detail::append_u32_le(out, 16);
  detail::append_u16_le(out, encoding == WavEncoding::Pcm16 ? 1 : 3);
  detail::append_u16_le(out, static_cast<std::uint16_t>(channels));
  detail::append_u32_le(out, sample_rate);
  detail::append_u32_le(out, sample_rate * block_align);
  detail::append_u16_le(out, block_align);
  detail::append_u16_le(out, bits);
  append_tag("data");
  detail::append_u32_le(out, data_size);

  for (std::size_t n = 0; n < audio.num_samples(); ++n) {
    for (int ch = 0; ch < channels; ++ch) {
      double v = audio.at(ch, n);
      if (encoding == WavEncoding::Pcm16) {
        auto raw = static_cast<std::int16_t>(
            std::llround(std::clamp(v, -1.0, 1.0) * 32767.0));
        detail::append_u16_le(out, static_cast<std::uint16_t>(raw));
      } else {
        float f = static_cast<float>(v);
        std::uint32_t bits_le;
        std::memcpy(&bits_le, &f, sizeof f);
        detail::append_u32_le(out, bits_le);
      }
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw SeldError("cannot open " + path + " for writing");
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw SeldError("failed writing " + path);
}

}  // namespace seld
