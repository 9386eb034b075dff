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

#include "rbinfer/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rbinfer/errors.hpp"

namespace rbinfer {

namespace {

constexpr double kEssWarningFraction = 0.01;
constexpr long kMaxSupportRejections = 100000;

Eigen::Matrix4d covariance_factor(const Eigen::Matrix4d& cov) {
  // Eigen-decomposition with negative eigenvalues clamped to zero, so nearly
  // singular posterior covariances still factor.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(cov);
  Eigen::Vector4d scale = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * scale.asDiagonal();
}

}  // namespace

ParticleCloud init_particles(const PriorSpec& prior, int n, Rng& rng) {
  if (n < 2) {
    throw Error(ErrorCategory::domain, "particle clouds need at least 2 particles");
  }
  ParticleCloud cloud;
  cloud.locations.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) cloud.locations.push_back(sample_prior(prior, rng));
  cloud.weights.assign(std::size_t(n), 1.0 / double(n));
  return cloud;
}

void bayes_update(ParticleCloud& cloud, const Datum& datum) {
  const std::size_t n = cloud.size();
  std::vector<double> log_weights(n);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double lw =
        (cloud.weights[i] > 0.0 ? std::log(cloud.weights[i]) : -std::numeric_limits<double>::infinity()) +
        log_likelihood(cloud.locations[i], datum);
    log_weights[i] = lw;
    max_log = std::max(max_log, lw);
  }
  if (!std::isfinite(max_log)) {
    throw Error(ErrorCategory::degenerate_posterior,
                "all particle weights vanished; the data contradict every hypothesis");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cloud.weights[i] = std::exp(log_weights[i] - max_log);
    total += cloud.weights[i];
  }
  for (double& w : cloud.weights) w /= total;
}

double effective_sample_size(const ParticleCloud& cloud) {
  double sum_sq = 0.0;
  for (double w : cloud.weights) sum_sq += w * w;
  return 1.0 / sum_sq;
}

ModelParams posterior_mean(const ParticleCloud& cloud) {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    mean += cloud.weights[i] * cloud.locations[i].to_vector();
  }
  return ModelParams::from_vector(mean);
}

Eigen::Matrix4d posterior_covariance(const ParticleCloud& cloud) {
  const Eigen::Vector4d mean = posterior_mean(cloud).to_vector();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector4d delta = cloud.locations[i].to_vector() - mean;
    cov += cloud.weights[i] * (delta * delta.transpose());
  }
  return cov;
}

void liu_west_resample(ParticleCloud& cloud, double a, Rng& rng) {
  if (!(a > 0.0 && a <= 1.0)) {
    throw Error(ErrorCategory::domain, "Liu-West parameter a must lie in (0, 1]");
  }
  const std::size_t n = cloud.size();
  const Eigen::Vector4d mean = posterior_mean(cloud).to_vector();
  const Eigen::Matrix4d factor = covariance_factor(posterior_covariance(cloud));
  const double noise_scale = std::sqrt(std::max(0.0, 1.0 - a * a));

  std::discrete_distribution<std::size_t> select(cloud.weights.begin(), cloud.weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<ModelParams> fresh;
  fresh.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector4d picked = cloud.locations[select(rng)].to_vector();
    const Eigen::Vector4d shrunk = a * picked + (1.0 - a) * mean;
    if (a == 1.0) {
      fresh.push_back(ModelParams::from_vector(shrunk));
      continue;
    }
    long attempts = 0;
    while (true) {
      Eigen::Vector4d z;
      for (int k = 0; k < 4; ++k) z[k] = normal(rng);
      const ModelParams candidate =
          ModelParams::from_vector(shrunk + noise_scale * (factor * z));
      if (in_support(candidate)) {
        fresh.push_back(candidate);
        break;
      }
      if (++attempts >= kMaxSupportRejections) {
        throw Error(ErrorCategory::support_collision,
                    "Liu-West proposal could not be placed inside the support");
      }
    }
  }
  cloud.locations = std::move(fresh);
  std::fill(cloud.weights.begin(), cloud.weights.end(), 1.0 / double(n));
}

SmcResult run_smc(const PriorSpec& prior, const Dataset& dataset, const SmcConfig& config,
                  ParticleCloud* final_cloud) {
  if (dataset.empty()) {
    throw Error(ErrorCategory::domain, "run_smc requires a nonempty dataset");
  }
  if (!(config.resample_threshold > 0.0 && config.resample_threshold < 1.0)) {
    throw Error(ErrorCategory::domain, "resample threshold must lie in (0, 1)");
  }
  Rng rng(config.rng_seed);
  ParticleCloud cloud = init_particles(prior, config.n_particles, rng);

  SmcDiagnostics diag;
  diag.min_ess = double(cloud.size());
  for (const Datum& datum : dataset) {
    bayes_update(cloud, datum);
    const double ess = effective_sample_size(cloud);
    diag.min_ess = std::min(diag.min_ess, ess);
    if (ess < config.resample_threshold * double(cloud.size())) {
      liu_west_resample(cloud, config.liu_west_a, rng);
      ++diag.resample_count;
    }
  }
  diag.final_ess = effective_sample_size(cloud);
  diag.ess_warning = diag.min_ess < kEssWarningFraction * double(cloud.size());

  SmcResult result{posterior_mean(cloud), posterior_covariance(cloud), diag};
  if (final_cloud != nullptr) *final_cloud = std::move(cloud);
  return result;
}

}  // namespace rbinfer
