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

#include <span>
#include <vector>

#include "rbinfer/model.hpp"

namespace rbinfer {

/// One fitted point: sequence length, observed survival frequency, and the
/// shot count behind the frequency (kept for provenance; the default fit is
/// unweighted).
struct FitPoint {
  int m = 1;
  double frequency = 0.0;
  std::int64_t shots = 1;
};

struct FitResult {
  double A = 0.0;
  double B = 0.0;
  double p = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct LsfEstimate {
  ModelParams estimate;
  FitResult reference_fit;
  FitResult interleaved_fit;
};

/// Levenberg-Marquardt fit of frequency = A p^m + B with analytic Jacobian.
/// Parameters are clipped to [-1,1] x [0,1] x [0,1] after every accepted
/// step; convergence when the step norm drops below 1e-10, capped at 500
/// iterations. With shot_weighted, residuals are scaled by sqrt(shots)
/// (off by default: the traditional baseline is unweighted).
FitResult fit_zeroth_order(std::span<const FitPoint> points, double guess_A, double guess_B,
                           double guess_p, bool shot_weighted = false);

/// Traditional interleaved estimate: separate per-mode fits, then
/// p_tilde = p_C / p_ref with A, B taken from the reference fit. The guess is
/// expected to be a draw from the experimenter's prior. Throws
/// ErrorCategory::ratio_undefined when the reference fit returns p = 0.
LsfEstimate lsf_interleaved_estimate(std::span<const FitPoint> reference_points,
                                     std::span<const FitPoint> interleaved_points,
                                     const ModelParams& guess, bool shot_weighted = false);

}  // namespace rbinfer
