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
#include <vector>

#include "rbinfer/model.hpp"
#include "rbinfer/prior.hpp"
#include "rbinfer/rng.hpp"

namespace rbinfer {

/// Weighted hypothesis set approximating the posterior over ModelParams.
/// Invariants: weights sum to 1, every location lies in the support.
/// A cloud is owned by a single updating context at a time.
struct ParticleCloud {
  std::vector<ModelParams> locations;
  std::vector<double> weights;

  std::size_t size() const { return locations.size(); }
};

struct SmcConfig {
  int n_particles = 4000;
  double resample_threshold = 0.5;  // resample when ESS < threshold * n
  double liu_west_a = 0.98;
  std::uint64_t rng_seed = 0;
};

struct SmcDiagnostics {
  double min_ess = 0.0;
  double final_ess = 0.0;
  int resample_count = 0;
  // Set when the minimum ESS fell below 1% of the particle count, the sign
  // that the prior was badly matched to the data and the estimate may be
  // unreliable.
  bool ess_warning = false;
};

struct SmcResult {
  ModelParams estimate;
  Eigen::Matrix4d covariance;
  SmcDiagnostics diagnostics;
};

/// n independent draws from the truncated prior with uniform weights.
ParticleCloud init_particles(const PriorSpec& prior, int n, Rng& rng);

/// Bayes rule: w_i <- w_i * likelihood_i, renormalized. Locations unchanged.
/// Throws ErrorCategory::degenerate_posterior if every weight vanishes.
void bayes_update(ParticleCloud& cloud, const Datum& datum);

/// 1 / sum(w_i^2), in [1, n].
double effective_sample_size(const ParticleCloud& cloud);

/// Liu-West kernel resampling: selects locations by weight, shrinks toward
/// the posterior mean (mu = a x + (1-a) xbar) and perturbs with covariance
/// (1 - a^2) Sigma. Proposals outside the support are redrawn; weights reset
/// to 1/n. a = 1 degenerates to a multinomial bootstrap.
void liu_west_resample(ParticleCloud& cloud, double a, Rng& rng);

ModelParams posterior_mean(const ParticleCloud& cloud);
Eigen::Matrix4d posterior_covariance(const ParticleCloud& cloud);

/// Full pipeline: init from the prior, then per datum a Bayes update followed
/// by a Liu-West resample whenever the ESS drops below threshold * n. Data
/// are processed in the order given. Pass final_cloud to keep the posterior
/// particle approximation itself.
SmcResult run_smc(const PriorSpec& prior, const Dataset& dataset, const SmcConfig& config,
                  ParticleCloud* final_cloud = nullptr);

}  // namespace rbinfer
