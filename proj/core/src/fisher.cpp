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

#include "rbinfer/fisher.hpp"

#include <cmath>
#include <limits>

#include "rbinfer/errors.hpp"

namespace rbinfer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// m * p^(m-1) with the m = 0 case handled before p^(m-1) can misbehave.
double decay_derivative(double p, int m) {
  if (m == 0) return 0.0;
  return double(m) * pow_int(p, m - 1);
}

}  // namespace

Eigen::Vector4d survival_gradient(const ModelParams& x, const ExperimentDesign& e) {
  if (e.m < 0) {
    throw Error(ErrorCategory::domain, "sequence length m must be nonnegative");
  }
  Eigen::Vector4d grad;
  if (e.mode == Mode::reference) {
    grad[0] = 0.0;
    grad[1] = x.A * decay_derivative(x.p_ref, e.m);
    grad[2] = pow_int(x.p_ref, e.m);
    grad[3] = 1.0;
  } else {
    grad[0] = x.A * decay_derivative(x.p_tilde, e.m) * pow_int(x.p_ref, e.m);
    grad[1] = x.A * pow_int(x.p_tilde, e.m) * decay_derivative(x.p_ref, e.m);
    grad[2] = pow_int(x.p_ref * x.p_tilde, e.m);
    grad[3] = 1.0;
  }
  return grad;
}

Eigen::Vector4d fisher_score(const ModelParams& x, int outcome, const ExperimentDesign& e) {
  if (outcome != 0 && outcome != 1) {
    throw Error(ErrorCategory::domain, "outcome must be 0 or 1");
  }
  const double q = survival_probability(x, e);
  if (q <= 0.0 || q >= 1.0) {
    throw Error(ErrorCategory::singular_likelihood,
                "survival probability is on the boundary; score undefined");
  }
  const Eigen::Vector4d grad = survival_gradient(x, e);
  return outcome == 1 ? Eigen::Vector4d(grad / q) : Eigen::Vector4d(-grad / (1.0 - q));
}

InfoMatrix fisher_information(const ModelParams& x, const ExperimentDesign& e) {
  const double q = survival_probability(x, e);
  if (q <= 0.0 || q >= 1.0) {
    throw Error(ErrorCategory::singular_likelihood,
                "survival probability is on the boundary; information undefined");
  }
  const Eigen::Vector4d grad = survival_gradient(x, e);
  return (grad * grad.transpose()) / (q * (1.0 - q));
}

InfoMatrix total_information(const ModelParams& x, std::span<const WeightedDesign> designs) {
  InfoMatrix info = InfoMatrix::Zero();
  for (const auto& wd : designs) {
    if (wd.shots < 0) {
      throw Error(ErrorCategory::domain, "design shot count must be nonnegative");
    }
    info += double(wd.shots) * fisher_information(x, wd.design);
  }
  return info;
}

Eigen::Matrix4d pseudo_inverse(const Eigen::Matrix4d& matrix, double rcond) {
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& singular = svd.singularValues();
  const double cutoff = rcond * singular[0];
  Eigen::Vector4d inv_singular = Eigen::Vector4d::Zero();
  for (int i = 0; i < 4; ++i) {
    if (singular[i] > cutoff && singular[i] > 0.0) inv_singular[i] = 1.0 / singular[i];
  }
  return svd.matrixV() * inv_singular.asDiagonal() * svd.matrixU().transpose();
}

InfoMatrix crb(const ModelParams& x, std::span<const WeightedDesign> designs) {
  if (designs.empty()) {
    throw Error(ErrorCategory::domain, "crb requires at least one design");
  }
  return pseudo_inverse(total_information(x, designs));
}

double single_param_bound(const ModelParams& x, std::span<const WeightedDesign> designs) {
  const double info = total_information(x, designs)(0, 0);
  return info > 0.0 ? 1.0 / info : kInf;
}

int optimal_m(const ModelParams& x, Mode mode, int m_min, int m_max) {
  if (m_min > m_max || m_min < 0) {
    throw Error(ErrorCategory::domain, "empty or negative optimal_m scan range");
  }
  if (auto violation = support_violation(x)) {
    throw Error(ErrorCategory::domain, "parameters outside support: " + *violation);
  }
  int best_m = m_min;
  double best = -kInf;
  for (int m = m_min; m <= m_max; ++m) {
    const ExperimentDesign e{m, mode};
    const double q = survival_probability(x, e);
    if (q <= 0.0 || q >= 1.0) continue;
    const Eigen::Vector4d grad = survival_gradient(x, e);
    const double element = grad[0] * grad[0] / (q * (1.0 - q));
    if (element > best) {
      best = element;
      best_m = m;
    }
  }
  return best_m;
}

double optimal_m_large_d(double f_tilde, double f_ref) {
  const double product = f_tilde * f_ref;
  if (!(product > 0.0 && product < 1.0)) {
    if (product == 1.0) {
      throw Error(ErrorCategory::divergence, "optimal_m_large_d diverges at F_tilde * F_ref = 1");
    }
    throw Error(ErrorCategory::domain, "F_tilde * F_ref must lie in (0, 1)");
  }
  return 1.0 / (1.0 - product);
}

void validate(const PriorSpec& prior) {
  if (auto violation = support_violation(prior.mean)) {
    throw Error(ErrorCategory::domain, "prior mean outside support: " + *violation);
  }
  for (double s : prior.sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCategory::domain, "prior deviations must be finite and nonnegative");
    }
  }
}

ModelParams sample_prior(const PriorSpec& prior, Rng& rng) {
  validate(prior);
  if (prior.is_point_mass()) return prior.mean;
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Vector4d mean = prior.mean.to_vector();
  long attempts = 0;
  while (true) {
    Eigen::Vector4d draw;
    for (int i = 0; i < 4; ++i) draw[i] = mean[i] + prior.sigma[std::size_t(i)] * normal(rng);
    const ModelParams candidate = ModelParams::from_vector(draw);
    if (in_support(candidate)) return candidate;
    // Acceptance below 1e-3 means the prior has essentially no mass in the
    // support region.
    if (++attempts >= 10000) {
      throw Error(ErrorCategory::sampling,
                  "prior acceptance rate below 1e-3; prior mass outside support");
    }
  }
}

InfoMatrix prior_information(const PriorSpec& prior) {
  validate(prior);
  InfoMatrix info = InfoMatrix::Zero();
  for (int i = 0; i < 4; ++i) {
    const double s = prior.sigma[std::size_t(i)];
    if (s <= 0.0) {
      throw Error(ErrorCategory::domain,
                  "prior_information requires strictly positive deviations");
    }
    info(i, i) = 1.0 / (s * s);
  }
  return info;
}

InfoMatrix bayesian_information_matrix(const PriorSpec& prior,
                                       std::span<const WeightedDesign> designs,
                                       int n_samples, Rng& rng,
                                       bool include_prior_information) {
  if (n_samples < 1) {
    throw Error(ErrorCategory::domain, "bayesian_information_matrix needs n_samples >= 1");
  }
  validate(prior);
  InfoMatrix info = InfoMatrix::Zero();
  if (prior.is_point_mass()) {
    info = total_information(prior.mean, designs);
  } else {
    for (int i = 0; i < n_samples; ++i) {
      info += total_information(sample_prior(prior, rng), designs);
    }
    info /= double(n_samples);
  }
  if (include_prior_information) info += prior_information(prior);
  return info;
}

InfoMatrix bcrb(const PriorSpec& prior, std::span<const WeightedDesign> designs,
                int n_samples, Rng& rng, bool include_prior_information) {
  return pseudo_inverse(
      bayesian_information_matrix(prior, designs, n_samples, rng, include_prior_information));
}

}  // namespace rbinfer
