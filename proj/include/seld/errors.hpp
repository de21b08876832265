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

#include <stdexcept>
#include <string>

namespace seld {

/// Base class for all library errors.
struct SeldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// audio-io
struct MalformedWav : SeldError {
  using SeldError::SeldError;
};
struct ChannelMismatch : SeldError {
  using SeldError::SeldError;
};
struct SampleRateMismatch : SeldError {
  using SeldError::SeldError;
};
struct BlockLengthMismatch : SeldError {
  using SeldError::SeldError;
};
struct InsufficientBlocks : SeldError {
  using SeldError::SeldError;
};
struct NonUnitDirection : SeldError {
  using SeldError::SeldError;
};

// spectral primitives
struct EmptyInput : SeldError {
  using SeldError::SeldError;
};
struct InvalidRange : SeldError {
  using SeldError::SeldError;
};
struct DimensionMismatch : SeldError {
  using SeldError::SeldError;
};
struct TooFewChannels : SeldError {
  using SeldError::SeldError;
};

// inference
struct SpecMismatch : SeldError {
  using SeldError::SeldError;
};
struct BackendFailure : SeldError {
  using SeldError::SeldError;
};
struct InvalidSpec : SeldError {
  using SeldError::SeldError;
};
struct ShapeInconsistent : SeldError {
  using SeldError::SeldError;
};

// metrics
struct NonUnitInput : SeldError {
  using SeldError::SeldError;
};
struct ResolutionMismatch : SeldError {
  using SeldError::SeldError;
};
struct RangeViolation : SeldError {
  using SeldError::SeldError;
};

// file ingestion
struct CsvParseError : SeldError {
  CsvParseError(const std::string& msg, std::size_t line)
      : SeldError(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
  std::size_t line_number;
};

}  // namespace seld
