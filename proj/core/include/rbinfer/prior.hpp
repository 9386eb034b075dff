// Copyright 2026 The rbinfer Authors
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

#include <array>

#include "rbinfer/model.hpp"
#include "rbinfer/rng.hpp"

namespace rbinfer {

/// Normal prior with diagonal covariance, truncated to the model support by
/// rejection. A component deviation of exactly 0 pins that component to the
/// mean (all-zero sigma is the point-mass prior).
struct PriorSpec {
  ModelParams mean;
  std::array<double, 4> sigma{0.01, 0.01, 0.01, 0.01};

  bool is_point_mass() const {
    return sigma[0] == 0.0 && sigma[1] == 0.0 && sigma[2] == 0.0 && sigma[3] == 0.0;
  }
};

/// Throws ErrorCategory::domain if the mean is out of support or any sigma is
/// negative.
void validate(const PriorSpec& prior);

/// One draw from the truncated prior. Throws ErrorCategory::sampling when the
/// acceptance rate is below 1e-3 (measured after 10^4 rejected proposals).
ModelParams sample_prior(const PriorSpec& prior, Rng& rng);

}  // namespace rbinfer
