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

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "rbinfer/model.hpp"
#include "rbinfer/prior.hpp"
#include "rbinfer/rng.hpp"

namespace rbinfer {

/// 4x4 symmetric PSD matrix in parameter order (p_tilde, p_ref, A, B).
/// Entries are per-shot (information per Bernoulli trial); total_information
/// scales by shot counts.
using InfoMatrix = Eigen::Matrix4d;

/// Gradient of the survival probability with respect to (p_tilde, p_ref, A, B).
Eigen::Vector4d survival_gradient(const ModelParams& x, const ExperimentDesign& e);

/// Score (gradient of the outcome log-likelihood): grad q / q for outcome 1,
/// -grad q / (1 - q) for outcome 0. Throws ErrorCategory::singular_likelihood
/// when the survival probability is exactly 0 or 1.
Eigen::Vector4d fisher_score(const ModelParams& x, int outcome, const ExperimentDesign& e);

/// Per-shot Fisher information of one design: (grad q)(grad q)^T / (q (1-q)).
/// Rank 1 for any single design.
InfoMatrix fisher_information(const ModelParams& x, const ExperimentDesign& e);

/// Sum of shots * fisher_information over the designs.
InfoMatrix total_information(const ModelParams& x, std::span<const WeightedDesign> designs);

/// Moore-Penrose pseudo-inverse with singular values below
/// rcond * sigma_max treated as zero.
Eigen::Matrix4d pseudo_inverse(const Eigen::Matrix4d& matrix, double rcond = 1e-10);

/// Cramer-Rao lower bound on the error matrix: pseudo-inverse of the total
/// information (exact inverse whenever the information has full rank).
InfoMatrix crb(const ModelParams& x, std::span<const WeightedDesign> designs);

/// Scalar bound on the p_tilde error alone, 1 / I_{p_tilde,p_tilde}.
/// Reference-only design sets carry no p_tilde information and give +infinity.
double single_param_bound(const ModelParams& x, std::span<const WeightedDesign> designs);

/// Integer scan of the (p_tilde, p_tilde) information element over
/// [m_min, m_max]; ties break toward smaller m. Lengths where the survival
/// probability hits 0 or 1 contribute no admissible information and are
/// skipped.
int optimal_m(const ModelParams& x, Mode mode, int m_min, int m_max);

/// Large-d limit of the optimal sequence length, 1 / (1 - F_tilde * F_ref).
/// Throws ErrorCategory::divergence when F_tilde * F_ref == 1.
double optimal_m_large_d(double f_tilde, double f_ref);

/// Diagonal information carried by the (untruncated) normal prior itself,
/// diag(1/sigma_i^2). Requires strictly positive deviations.
InfoMatrix prior_information(const PriorSpec& prior);

/// Monte Carlo mean of total_information over prior draws (rejected against
/// the support). A point-mass prior short-circuits to a single evaluation at
/// the mean. With include_prior_information the diagonal prior information is
/// added, which is what makes the inverse a valid bound for prior-informed
/// estimators (see bcrb).
InfoMatrix bayesian_information_matrix(const PriorSpec& prior,
                                       std::span<const WeightedDesign> designs,
                                       int n_samples, Rng& rng,
                                       bool include_prior_information = false);

/// Bayesian Cramer-Rao bound: pseudo-inverse of the Bayesian information
/// matrix. Without the prior-information term this is the data-only bound
/// E >= J^-1 with J = E_prior[I(x)]; with it, the van Trees form that also
/// bounds estimators exploiting the prior (used by the risk harness).
InfoMatrix bcrb(const PriorSpec& prior, std::span<const WeightedDesign> designs,
                int n_samples, Rng& rng, bool include_prior_information = false);

}  // namespace rbinfer
