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

#include "rbinfer/lsf.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "rbinfer/errors.hpp"

namespace rbinfer {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kStepTolerance = 1e-10;

Eigen::Vector3d clip_to_box(Eigen::Vector3d theta) {
  theta[0] = std::clamp(theta[0], -1.0, 1.0);  // A
  theta[1] = std::clamp(theta[1], 0.0, 1.0);   // B
  theta[2] = std::clamp(theta[2], 0.0, 1.0);   // p
  return theta;
}

double sum_squared_residuals(std::span<const FitPoint> points, const Eigen::Vector3d& theta,
                             bool shot_weighted) {
  double total = 0.0;
  for (const auto& pt : points) {
    const double model = theta[0] * pow_int(theta[2], pt.m) + theta[1];
    const double weight = shot_weighted ? double(pt.shots) : 1.0;
    const double r = pt.frequency - model;
    total += weight * r * r;
  }
  return total;
}

}  // namespace

FitResult fit_zeroth_order(std::span<const FitPoint> points, double guess_A, double guess_B,
                           double guess_p, bool shot_weighted) {
  std::set<int> lengths;
  for (const auto& pt : points) {
    lengths.insert(pt.m);
    if (pt.shots < 1) {
      throw Error(ErrorCategory::domain, "fit points need positive shot counts");
    }
  }
  if (lengths.size() < 3) {
    throw Error(ErrorCategory::underdetermined,
                "fitting three parameters needs at least 3 distinct sequence lengths");
  }

  Eigen::Vector3d theta = clip_to_box({guess_A, guess_B, guess_p});
  double cost = sum_squared_residuals(points, theta, shot_weighted);
  double lambda = 1e-3;

  FitResult result;
  int iter = 0;
  for (; iter < kMaxIterations; ++iter) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (const auto& pt : points) {
      const double pm = pow_int(theta[2], pt.m);
      const double model = theta[0] * pm + theta[1];
      Eigen::Vector3d jac;
      jac[0] = pm;
      jac[1] = 1.0;
      jac[2] = pt.m == 0 ? 0.0 : theta[0] * double(pt.m) * pow_int(theta[2], pt.m - 1);
      const double weight = shot_weighted ? double(pt.shots) : 1.0;
      jtj += weight * jac * jac.transpose();
      jtr += weight * jac * (pt.frequency - model);
    }

    const Eigen::Vector3d step =
        (jtj + lambda * Eigen::Matrix3d::Identity()).ldlt().solve(jtr);
    const Eigen::Vector3d candidate = clip_to_box(theta + step);
    const double candidate_cost = sum_squared_residuals(points, candidate, shot_weighted);

    if (candidate_cost <= cost) {
      const double moved = (candidate - theta).norm();
      theta = candidate;
      cost = candidate_cost;
      lambda = std::max(lambda * 0.5, 1e-12);
      if (moved < kStepTolerance) {
        result.converged = true;
        ++iter;
        break;
      }
    } else {
      lambda *= 4.0;
      if (lambda > 1e12) break;  // damping saturated; no acceptable step
    }
  }

  result.A = theta[0];
  result.B = theta[1];
  result.p = theta[2];
  result.residual_norm = std::sqrt(cost);
  result.iterations = iter;
  return result;
}

LsfEstimate lsf_interleaved_estimate(std::span<const FitPoint> reference_points,
                                     std::span<const FitPoint> interleaved_points,
                                     const ModelParams& guess, bool shot_weighted) {
  const FitResult ref =
      fit_zeroth_order(reference_points, guess.A, guess.B, guess.p_ref, shot_weighted);
  const FitResult inter = fit_zeroth_order(interleaved_points, guess.A, guess.B,
                                           guess.p_ref * guess.p_tilde, shot_weighted);
  if (ref.p == 0.0) {
    throw Error(ErrorCategory::ratio_undefined,
                "reference fit returned p = 0; interleaved ratio undefined");
  }
  LsfEstimate out;
  out.reference_fit = ref;
  out.interleaved_fit = inter;
  out.estimate = ModelParams{inter.p / ref.p, ref.p, ref.A, ref.B};
  return out;
}

}  // namespace rbinfer
