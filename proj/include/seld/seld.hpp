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

#include "seld/audio.hpp"
#include "seld/capture.hpp"
#include "seld/cost_model.hpp"
#include "seld/errors.hpp"
#include "seld/feature_io.hpp"
#include "seld/features.hpp"
#include "seld/fft.hpp"
#include "seld/inference.hpp"
#include "seld/manifest.hpp"
#include "seld/mel.hpp"
#include "seld/metrics.hpp"
#include "seld/pipeline.hpp"
#include "seld/simulate.hpp"
#include "seld/stft.hpp"
#include "seld/version.hpp"
#include "seld/wav.hpp"
