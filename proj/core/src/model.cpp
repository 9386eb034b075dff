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

#include "rbinfer/model.hpp"

#include <cmath>
#include <limits>

#include "rbinfer/errors.hpp"

namespace rbinfer {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::sampling: return "sampling";
    case ErrorCategory::singular_likelihood: return "singular_likelihood";
    case ErrorCategory::degenerate_posterior: return "degenerate_posterior";
    case ErrorCategory::support_collision: return "support_collision";
    case ErrorCategory::underdetermined: return "underdetermined";
    case ErrorCategory::ratio_undefined: return "ratio_undefined";
    case ErrorCategory::divergence: return "divergence";
    case ErrorCategory::construction: return "construction";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

std::string_view to_string(Mode mode) {
  return mode == Mode::reference ? "reference" : "interleaved";
}

std::optional<Mode> mode_from_string(std::string_view text) {
  if (text == "reference" || text == "ref") return Mode::reference;
  if (text == "interleaved" || text == "int") return Mode::interleaved;
  return std::nullopt;
}

double pow_int(double base, std::int64_t exponent) {
  if (exponent <= 0) return 1.0;
  double result = 1.0;
  double factor = base;
  std::int64_t e = exponent;
  while (e > 0) {
    if (e & 1) result *= factor;
    factor *= factor;
    e >>= 1;
  }
  return result;
}

std::optional<std::string> support_violation(const ModelParams& x) {
  if (!(x.p_tilde >= 0.0 && x.p_tilde <= 1.0)) return "p_tilde outside [0, 1]";
  if (!(x.p_ref >= 0.0 && x.p_ref <= 1.0)) return "p_ref outside [0, 1]";
  if (!(x.A >= -1.0 && x.A <= 1.0)) return "A outside [-1, 1]";
  if (!(x.B >= 0.0 && x.B <= 1.0)) return "B outside [0, 1]";
  // A p^m + B is monotone in p^m, so checking the m = 0 endpoint A + B and
  // the m -> infinity endpoint B bounds every survival probability.
  if (!(x.A + x.B >= 0.0 && x.A + x.B <= 1.0)) return "A + B outside [0, 1]";
  return std::nullopt;
}

bool in_support(const ModelParams& x) { return !support_violation(x).has_value(); }

double survival_probability(const ModelParams& x, const ExperimentDesign& e) {
  if (auto violation = support_violation(x)) {
    throw Error(ErrorCategory::domain, "parameters outside support: " + *violation);
  }
  if (e.m < 0) {
    throw Error(ErrorCategory::domain, "sequence length m must be nonnegative");
  }
  const double p = e.mode == Mode::reference ? x.p_ref : x.p_ref * x.p_tilde;
  return x.A * pow_int(p, e.m) + x.B;
}

double log_likelihood(const ModelParams& x, const Datum& d) {
  if (d.shots < 1) {
    throw Error(ErrorCategory::domain, "shots must be a positive integer");
  }
  if (d.survivals < 0 || d.survivals > d.shots) {
    throw Error(ErrorCategory::domain, "survivals must lie in [0, shots]");
  }
  const double q = survival_probability(x, d.design);
  const auto k = d.survivals;
  const auto n = d.shots;
  if (q <= 0.0) return k == 0 ? 0.0 : -kInf;
  if (q >= 1.0) return k == n ? 0.0 : -kInf;
  const double log_binom = std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
                           std::lgamma(double(n - k) + 1.0);
  return log_binom + double(k) * std::log(q) + double(n - k) * std::log1p(-q);
}

std::pair<double, double> ideal_params(Dimension dim) {
  if (dim.d < 2) {
    throw Error(ErrorCategory::domain, "Hilbert-space dimension must be >= 2");
  }
  const double inv_d = 1.0 / double(dim.d);
  return {1.0 - inv_d, inv_d};
}

double p_from_fidelity(double fidelity, Dimension dim) {
  if (dim.d < 2) {
    throw Error(ErrorCategory::domain, "Hilbert-space dimension must be >= 2");
  }
  return (double(dim.d) * fidelity - 1.0) / (double(dim.d) - 1.0);
}

double fidelity_from_p(double p, Dimension dim) {
  if (dim.d < 2) {
    throw Error(ErrorCategory::domain, "Hilbert-space dimension must be >= 2");
  }
  return (p * (double(dim.d) - 1.0) + 1.0) / double(dim.d);
}

}  // namespace rbinfer
