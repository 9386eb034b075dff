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

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rbinfer {

/// Hilbert-space dimension. Only d = 2 is simulated, but the analytic maps
/// between decay parameter and average fidelity hold for any d >= 2.
struct Dimension {
  int d = 2;
};

enum class Mode { reference, interleaved };

std::string_view to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view text);

/// Parameters of the interleaved zeroth-order decay model, in the fixed
/// component order (p_tilde, p_ref, A, B) used by every 4-vector and 4x4
/// matrix in this library.
///
/// Survival probabilities are A * p_ref^m + B (reference mode) and
/// A * (p_ref * p_tilde)^m + B (interleaved mode).
struct ModelParams {
  double p_tilde = 1.0;  // interleaved-gate depolarizing parameter
  double p_ref = 1.0;    // reference depolarizing parameter
  double A = 0.5;        // SPAM scale
  double B = 0.5;        // SPAM offset

  Eigen::Vector4d to_vector() const { return {p_tilde, p_ref, A, B}; }
  static ModelParams from_vector(const Eigen::Vector4d& v) {
    return {v[0], v[1], v[2], v[3]};
  }
};

/// One experimental setting: a sequence length and a benchmarking mode.
/// m = 0 is accepted by the analytic operations (survival A + B) but is not
/// a realizable experiment and is rejected by the gate-level simulator.
struct ExperimentDesign {
  int m = 1;
  Mode mode = Mode::reference;
};

/// Aggregated outcome record for one design. Every shot corresponds to an
/// independently drawn random sequence, so `survivals` is Binomial(shots, q)
/// with q the marginalized survival probability.
struct Datum {
  ExperimentDesign design;
  std::int64_t shots = 1;
  std::int64_t survivals = 0;
};

using Dataset = std::vector<Datum>;

/// A design together with the number of shots taken at it.
struct WeightedDesign {
  ExperimentDesign design;
  std::int64_t shots = 1;
};

/// b^e for integer e >= 0, by squaring. Used instead of std::pow so decay
/// evaluations are exact products and reproducible across libm versions.
double pow_int(double base, std::int64_t exponent);

/// Returns the first violated support constraint, or nullopt if `x` lies in
/// the support region (component bounds plus 0 <= A+B <= 1 and 0 <= B <= 1,
/// the m = 0 and m -> infinity endpoints of every survival curve).
std::optional<std::string> support_violation(const ModelParams& x);

bool in_support(const ModelParams& x);

/// Survival probability of the zeroth-order model at design `e`.
/// Throws ErrorCategory::domain naming the violated constraint when `x` is
/// outside the support or `e.m` is negative.
double survival_probability(const ModelParams& x, const ExperimentDesign& e);

/// Binomial log-likelihood of `d` under `x`. Boundary survival probabilities
/// (exactly 0 or 1) yield -infinity when the data contradict the boundary and
/// 0 otherwise, so impossible hypotheses drop out of a Bayes update.
double log_likelihood(const ModelParams& x, const Datum& d);

/// SPAM parameters of an ideal preparation/measurement: (1 - 1/d, 1/d).
std::pair<double, double> ideal_params(Dimension dim);

/// p = (d F - 1) / (d - 1). F below 1/d yields a negative p; the value is
/// returned as-is and a ModelParams holding it will fail in_support.
double p_from_fidelity(double fidelity, Dimension dim);

/// F = (p (d - 1) + 1) / d, the inverse of p_from_fidelity.
double fidelity_from_p(double p, Dimension dim);

}  // namespace rbinfer
