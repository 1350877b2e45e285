// Copyright 2026 The echodepth Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "echodepth/error.hpp"
#include "echodepth/fft.hpp"
#include "echodepth/hash.hpp"

#include "echodepth/acoustics/convolve.hpp"
#include "echodepth/acoustics/echo.hpp"
#include "echodepth/acoustics/image_source.hpp"
#include "echodepth/acoustics/render_depth.hpp"
#include "echodepth/acoustics/scene_sampler.hpp"
#include "echodepth/acoustics/types.hpp"

#include "echodepth/dsp/chirp.hpp"
#include "echodepth/dsp/features.hpp"
#include "echodepth/dsp/highpass.hpp"
#include "echodepth/dsp/stft.hpp"

#include "echodepth/augment/mixup.hpp"

#include "echodepth/nn/adam.hpp"
#include "echodepth/nn/conv.hpp"
#include "echodepth/nn/network.hpp"
#include "echodepth/nn/tensor.hpp"

#include "echodepth/training/loss.hpp"
#include "echodepth/training/trainer.hpp"

#include "echodepth/persistence/binary_io.hpp"
#include "echodepth/persistence/config.hpp"
#include "echodepth/persistence/dataset.hpp"
#include "echodepth/persistence/formats.hpp"

#include "echodepth/experiments/experiments.hpp"
