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

#include "rbinfer/gatesim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "rbinfer/errors.hpp"

namespace rbinfer {

namespace {

const Eigen::Vector4d kIdealState(1.0 / std::numbers::sqrt2, 0.0, 0.0, 1.0 / std::numbers::sqrt2);
constexpr double kClampLogThreshold = 1e-9;

std::array<Eigen::Matrix2cd, 4> pauli_matrices() {
  using namespace std::complex_literals;
  std::array<Eigen::Matrix2cd, 4> sigma;
  sigma[0] << 1, 0, 0, 1;
  sigma[1] << 0, 1, 1, 0;
  sigma[2] << 0, -1i, 1i, 0;
  sigma[3] << 1, 0, 0, -1;
  return sigma;
}

}  // namespace

Superoperator Superoperator::identity() { return Superoperator{}; }

Superoperator Superoperator::depolarizing(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw Error(ErrorCategory::construction, "depolarizing strength must lie in [0, 1]");
  }
  Superoperator s;
  s.ptm = Eigen::Vector4d(1.0, 1.0 - eps, 1.0 - eps, 1.0 - eps).asDiagonal();
  return s;
}

Superoperator Superoperator::z_rotation(double angle) {
  Superoperator s;
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  s.ptm << 1, 0, 0, 0,  //
      0, c, -sn, 0,     //
      0, sn, c, 0,      //
      0, 0, 0, 1;
  return s;
}

bool Superoperator::is_trace_preserving(double tol) const {
  return std::abs(ptm(0, 0) - 1.0) <= tol && std::abs(ptm(0, 1)) <= tol &&
         std::abs(ptm(0, 2)) <= tol && std::abs(ptm(0, 3)) <= tol;
}

Eigen::Matrix4cd Superoperator::choi() const {
  static const auto sigma = pauli_matrices();
  Eigen::Matrix4cd choi = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (ptm(i, j) == 0.0) continue;
      Eigen::Matrix4cd term = Eigen::Matrix4cd::Zero();
      const Eigen::Matrix2cd sj_t = sigma[std::size_t(j)].transpose();
      const Eigen::Matrix2cd& si = sigma[std::size_t(i)];
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          term.block<2, 2>(2 * r, 2 * c) = sj_t(r, c) * si;
        }
      }
      choi += 0.25 * ptm(i, j) * term;
    }
  }
  return choi;
}

double Superoperator::min_choi_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(choi());
  return solver.eigenvalues().minCoeff();
}

CliffordGroup::CliffordGroup() {
  // Bloch-sphere actions of the generators, columns = images of (x, y, z).
  RotationMatrix h, s;
  h << 0, 0, 1,  //
      0, -1, 0,  //
      1, 0, 0;
  s << 0, -1, 0,  //
      1, 0, 0,    //
      0, 0, 1;

  std::vector<RotationMatrix> found{RotationMatrix::Identity()};
  std::deque<RotationMatrix> frontier{RotationMatrix::Identity()};
  auto index_of = [&](const RotationMatrix& m) -> int {
    for (std::size_t i = 0; i < found.size(); ++i) {
      if (found[i] == m) return int(i);
    }
    return -1;
  };
  while (!frontier.empty()) {
    const RotationMatrix current = frontier.front();
    frontier.pop_front();
    for (const RotationMatrix& gen : {h, s}) {
      const RotationMatrix next = gen * current;
      if (index_of(next) < 0) {
        found.push_back(next);
        frontier.push_back(next);
      }
    }
  }
  if (found.size() != kOrder) {
    throw Error(ErrorCategory::construction, "Clifford closure did not produce 24 elements");
  }

  for (int i = 0; i < kOrder; ++i) {
    rotations_[std::size_t(i)] = found[std::size_t(i)];
    Superoperator element;
    element.ptm = Eigen::Matrix4d::Zero();
    element.ptm(0, 0) = 1.0;
    element.ptm.block<3, 3>(1, 1) = found[std::size_t(i)].cast<double>();
    elements_[std::size_t(i)] = element;
  }

  identity_ = index_of(RotationMatrix::Identity());
  for (int a = 0; a < kOrder; ++a) {
    for (int b = 0; b < kOrder; ++b) {
      const int prod = index_of(rotations_[std::size_t(a)] * rotations_[std::size_t(b)]);
      if (prod < 0) throw Error(ErrorCategory::construction, "Clifford group not closed");
      mult_table_[std::size_t(a)][std::size_t(b)] = prod;
    }
  }
  for (int a = 0; a < kOrder; ++a) {
    // Rotations are orthogonal, so the inverse is the transpose.
    const int inv = index_of(rotations_[std::size_t(a)].transpose());
    if (inv < 0 || multiply(a, inv) != identity_) {
      throw Error(ErrorCategory::construction, "Clifford inverse table inconsistent");
    }
    inverse_table_[std::size_t(a)] = inv;
  }

  RotationMatrix x, y, z;
  x << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  y << -1, 0, 0, 0, 1, 0, 0, 0, -1;
  z << -1, 0, 0, 0, -1, 0, 0, 0, 1;
  const std::array<std::pair<std::string, RotationMatrix>, 6> named{{
      {"I", RotationMatrix::Identity()},
      {"X", x},
      {"Y", y},
      {"Z", z},
      {"H", h},
      {"P", s},
  }};
  for (int i = 0; i < kOrder; ++i) labels_[std::size_t(i)] = "C" + std::to_string(i);
  for (const auto& [name, matrix] : named) {
    const int idx = index_of(matrix);
    if (idx < 0) throw Error(ErrorCategory::construction, "target gate missing from closure");
    labels_[std::size_t(idx)] = name;
    label_to_index_.emplace(name, idx);
  }
  label_to_index_.emplace("S", label_to_index_.at("P"));
  for (int i = 0; i < kOrder; ++i) {
    label_to_index_.emplace("C" + std::to_string(i), i);
  }
}

const CliffordGroup& CliffordGroup::instance() {
  static const CliffordGroup group;
  return group;
}

int CliffordGroup::label_index(const std::string& label) const {
  const auto it = label_to_index_.find(label);
  if (it == label_to_index_.end()) {
    throw Error(ErrorCategory::domain, "unknown gate label: " + label);
  }
  return it->second;
}

GateSet make_noisy_gateset(const NoiseConfig& noise) {
  const CliffordGroup& group = CliffordGroup::instance();
  GateSet gs;
  gs.state = kIdealState;
  gs.effect = kIdealState;
  gs.noisy.reserve(CliffordGroup::kOrder);
  for (int i = 0; i < CliffordGroup::kOrder; ++i) {
    double eps = noise.depolarizing;
    double theta = noise.overrotation;
    if (const auto it = noise.per_gate.find(group.canonical_label(i)); it != noise.per_gate.end()) {
      eps = it->second.depolarizing.value_or(eps);
      theta = it->second.overrotation.value_or(theta);
    }
    const Superoperator channel =
        Superoperator::depolarizing(eps).compose(Superoperator::z_rotation(theta));
    const Superoperator gate = noise.noise_before_gate ? group.element(i).compose(channel)
                                                       : channel.compose(group.element(i));
    if (!gate.is_trace_preserving()) {
      throw Error(ErrorCategory::construction, "noisy gate is not trace preserving");
    }
    if (gate.min_choi_eigenvalue() < -1e-10) {
      throw Error(ErrorCategory::construction, "noisy gate is not completely positive");
    }
    gs.noisy.push_back(gate);
  }
  return gs;
}

SequenceRecord random_sequence(int m, const GateSet& gateset,
                               const std::optional<std::string>& interleave, Rng& rng) {
  if (m < 1) {
    throw Error(ErrorCategory::domain, "sequence length m must be at least 1");
  }
  const CliffordGroup& group = gateset.group();
  std::uniform_int_distribution<int> uniform_gate(0, CliffordGroup::kOrder - 1);
  const int interleaved_index = interleave ? group.label_index(*interleave) : -1;

  SequenceRecord record;
  record.interleaved_with = interleave;
  record.gates.reserve(std::size_t(interleave ? 2 * m + 1 : m + 1));
  int composed = group.identity_index();
  for (int slot = 0; slot < m; ++slot) {
    const int g = uniform_gate(rng);
    record.gates.push_back(g);
    composed = group.multiply(g, composed);
    if (interleaved_index >= 0) {
      record.gates.push_back(interleaved_index);
      composed = group.multiply(interleaved_index, composed);
    }
  }
  record.gates.push_back(group.inverse(composed));
  return record;
}

std::atomic<std::uint64_t>& survival_clamp_events() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

double sequence_survival(const GateSet& gateset, const SequenceRecord& seq) {
  Eigen::Vector4d state = gateset.state;
  for (const int gate : seq.gates) {
    if (gate < 0 || gate >= CliffordGroup::kOrder) {
      throw Error(ErrorCategory::domain, "sequence holds an invalid gate index");
    }
    state = gateset.noisy[std::size_t(gate)].ptm * state;
  }
  const double raw = gateset.effect.dot(state);
  const double clamped = std::clamp(raw, 0.0, 1.0);
  if (std::abs(raw - clamped) > kClampLogThreshold) {
    survival_clamp_events().fetch_add(1, std::memory_order_relaxed);
  }
  return clamped;
}

Dataset sample_model_data(const ModelParams& x_true, std::span<const WeightedDesign> designs,
                          Rng& rng) {
  Dataset data;
  data.reserve(designs.size());
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (const auto& wd : designs) {
    const double q = survival_probability(x_true, wd.design);
    Datum datum{wd.design, wd.shots, 0};
    for (std::int64_t shot = 0; shot < wd.shots; ++shot) {
      if (uniform(rng) < q) ++datum.survivals;
    }
    data.push_back(datum);
  }
  return data;
}

Dataset sample_gate_data(const GateSet& gateset, std::span<const WeightedDesign> designs,
                         const std::string& interleaved_gate, Rng& rng,
                         std::vector<SequenceRecord>* records) {
  Dataset data;
  data.reserve(designs.size());
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (const auto& wd : designs) {
    const std::optional<std::string> interleave =
        wd.design.mode == Mode::interleaved ? std::optional<std::string>(interleaved_gate)
                                            : std::nullopt;
    Datum datum{wd.design, wd.shots, 0};
    for (std::int64_t shot = 0; shot < wd.shots; ++shot) {
      SequenceRecord seq = random_sequence(wd.design.m, gateset, interleave, rng);
      seq.survival_prob = sequence_survival(gateset, seq);
      seq.outcome = uniform(rng) < seq.survival_prob ? 1 : 0;
      datum.survivals += seq.outcome;
      if (records != nullptr) records->push_back(std::move(seq));
    }
    data.push_back(datum);
  }
  return data;
}

Superoperator twirl(const Superoperator& channel) {
  const CliffordGroup& group = CliffordGroup::instance();
  Eigen::Matrix4d sum = Eigen::Matrix4d::Zero();
  for (int g = 0; g < CliffordGroup::kOrder; ++g) {
    sum += group.element(group.inverse(g)).ptm * channel.ptm * group.element(g).ptm;
  }
  return Superoperator{sum / double(CliffordGroup::kOrder)};
}

GroundTruth true_params_from_gateset(const GateSet& gateset,
                                     const std::optional<std::string>& interleaved_gate) {
  const CliffordGroup& group = gateset.group();
  // Average error channel: the noise component of each gate with the ideal
  // action inverted out.
  Eigen::Matrix4d avg_error = Eigen::Matrix4d::Zero();
  for (int g = 0; g < CliffordGroup::kOrder; ++g) {
    avg_error += gateset.noisy[std::size_t(g)].ptm * group.element(group.inverse(g)).ptm;
  }
  avg_error /= double(CliffordGroup::kOrder);
  const Superoperator lambda{avg_error};

  const Superoperator twirled = twirl(lambda);
  GroundTruth truth;
  truth.p_ref = (twirled.ptm(1, 1) + twirled.ptm(2, 2) + twirled.ptm(3, 3)) / 3.0;

  const Eigen::Vector4d mixed(1.0 / std::numbers::sqrt2, 0.0, 0.0, 0.0);
  truth.A = gateset.effect.dot(lambda.ptm * (gateset.state - mixed));
  truth.B = gateset.effect.dot(lambda.ptm * mixed);
  truth.f_ave = fidelity_from_p(truth.p_ref, Dimension{2});

  if (interleaved_gate) {
    const int c = group.label_index(*interleaved_gate);
    const Eigen::Matrix4d lambda_c =
        gateset.noisy[std::size_t(c)].ptm * group.element(group.inverse(c)).ptm;
    const Superoperator composed{lambda_c * avg_error};
    const Superoperator twirled_c = twirl(composed);
    truth.p_interleaved =
        (twirled_c.ptm(1, 1) + twirled_c.ptm(2, 2) + twirled_c.ptm(3, 3)) / 3.0;
    if (truth.p_ref != 0.0) truth.p_tilde = *truth.p_interleaved / truth.p_ref;
  }
  return truth;
}

VarianceDecomposition variance_decomposition(const GateSet& gateset, int m, int n_sequences,
                                             Rng& rng) {
  if (n_sequences < 2) {
    throw Error(ErrorCategory::domain, "variance decomposition needs at least 2 sequences");
  }
  std::vector<double> survivals;
  survivals.reserve(std::size_t(n_sequences));
  for (int i = 0; i < n_sequences; ++i) {
    survivals.push_back(sequence_survival(gateset, random_sequence(m, gateset, {}, rng)));
  }
  double mean = 0.0;
  for (double p : survivals) mean += p;
  mean /= double(n_sequences);

  VarianceDecomposition out;
  out.total = mean * (1.0 - mean);
  for (double p : survivals) {
    out.between += (p - mean) * (p - mean);
    out.within += p * (1.0 - p);
  }
  out.between /= double(n_sequences);
  out.within /= double(n_sequences);
  return out;
}

}  // namespace rbinfer
