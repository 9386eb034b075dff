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
#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbinfer/model.hpp"
#include "rbinfer/rng.hpp"

namespace rbinfer {

/// Single-qubit channel in the Pauli transfer representation on the
/// normalized basis {I, X, Y, Z} / sqrt(2). Composition is matrix product.
struct Superoperator {
  Eigen::Matrix4d ptm = Eigen::Matrix4d::Identity();

  static Superoperator identity();
  /// (1 - eps) rho + eps I/2, i.e. PTM diag(1, 1-eps, 1-eps, 1-eps).
  static Superoperator depolarizing(double eps);
  /// Unitary rotation about Z by `angle` radians.
  static Superoperator z_rotation(double angle);

  Superoperator compose(const Superoperator& first_applied) const {
    return Superoperator{ptm * first_applied.ptm};
  }

  bool is_trace_preserving(double tol = 1e-12) const;
  /// Choi matrix (trace normalized to 1 for a TP channel).
  Eigen::Matrix4cd choi() const;
  double min_choi_eigenvalue() const;
};

/// Conjugation action of a Clifford element on the Bloch vector: a signed
/// permutation with determinant +1, stored exactly as integers.
using RotationMatrix = Eigen::Matrix3i;

/// The 24-element single-qubit Clifford group with exact multiplication and
/// inverse tables. Immutable after construction; share freely across threads.
class CliffordGroup {
 public:
  static constexpr int kOrder = 24;

  static const CliffordGroup& instance();

  const Superoperator& element(int index) const { return elements_[std::size_t(index)]; }
  const RotationMatrix& rotation(int index) const { return rotations_[std::size_t(index)]; }
  int multiply(int left, int right) const { return mult_table_[std::size_t(left)][std::size_t(right)]; }
  int inverse(int index) const { return inverse_table_[std::size_t(index)]; }
  int identity_index() const { return identity_; }

  /// Index of a named target gate: one of I, X, Y, Z, H, P (alias S), or
  /// C0..C23. Throws ErrorCategory::domain for unknown labels.
  int label_index(const std::string& label) const;
  const std::string& canonical_label(int index) const { return labels_[std::size_t(index)]; }

 private:
  CliffordGroup();

  std::array<RotationMatrix, kOrder> rotations_;
  std::array<Superoperator, kOrder> elements_;
  std::array<std::array<int, kOrder>, kOrder> mult_table_;
  std::array<int, kOrder> inverse_table_;
  std::array<std::string, kOrder> labels_;
  std::map<std::string, int, std::less<>> label_to_index_;
  int identity_ = 0;
};

struct GateNoise {
  std::optional<double> depolarizing;
  std::optional<double> overrotation;
};

/// Parametric noise attached to every gate: depolarizing of the given
/// strength composed with a coherent Z-axis overrotation, with optional
/// per-label overrides. By default the noise channel follows the ideal gate.
struct NoiseConfig {
  double depolarizing = 0.0;
  double overrotation = 0.0;
  bool noise_before_gate = false;
  std::map<std::string, GateNoise> per_gate;
};

/// Noisy realization of the full Clifford group plus SPAM vectors.
/// state/effect are 4-vectors in the normalized Pauli basis; the ideal
/// |0><0| preparation and measurement are (1, 0, 0, 1) / sqrt(2).
struct GateSet {
  std::vector<Superoperator> noisy;  // indexed like CliffordGroup
  Eigen::Vector4d state;
  Eigen::Vector4d effect;

  const CliffordGroup& group() const { return CliffordGroup::instance(); }
};

/// Builds the noisy gate set; every constructed channel is validated to be
/// trace preserving and completely positive (ErrorCategory::construction).
GateSet make_noisy_gateset(const NoiseConfig& noise);

/// One benchmarking sequence: `gates` lists group indices in application
/// order. A reference sequence of length m holds m random draws plus the
/// closing inverse; an interleaved one alternates (random, C) pairs before
/// the closing inverse. The ideal composition is always the identity.
struct SequenceRecord {
  std::vector<int> gates;
  std::optional<std::string> interleaved_with;
  double survival_prob = -1.0;  // filled by sample_gate_data
  int outcome = -1;             // filled by sample_gate_data
};

SequenceRecord random_sequence(int m, const GateSet& gateset,
                               const std::optional<std::string>& interleave, Rng& rng);

/// Tr[E S rho] for the noisy sequence, clamped to [0, 1]. Clamp events larger
/// than 1e-9 are counted in survival_clamp_events().
double sequence_survival(const GateSet& gateset, const SequenceRecord& seq);

std::atomic<std::uint64_t>& survival_clamp_events();

/// Model-faithful generator: per design, `shots` Bernoulli draws at the
/// zeroth-order survival probability (each draw standing for a fresh random
/// sequence).
Dataset sample_model_data(const ModelParams& x_true, std::span<const WeightedDesign> designs,
                          Rng& rng);

/// Gate-level generator: every shot samples a freshly drawn random sequence
/// (single-shot-per-sequence contract). Pass `records` to keep the raw
/// per-shot sequences for audit.
Dataset sample_gate_data(const GateSet& gateset, std::span<const WeightedDesign> designs,
                         const std::string& interleaved_gate, Rng& rng,
                         std::vector<SequenceRecord>* records = nullptr);

/// Group average (1/24) sum_g G^-1 Lambda G; always of depolarizing form.
Superoperator twirl(const Superoperator& channel);

struct GroundTruth {
  double p_ref = 1.0;
  double A = 0.5;
  double B = 0.5;
  double f_ave = 1.0;
  std::optional<double> p_interleaved;
  std::optional<double> p_tilde;
};

/// Zeroth-order ground truth of a gate set: the average error channel
/// Lambda = mean_g(noisy_g ideal_g^-1), its twirl's decay parameter, and the
/// SPAM constants A = E Lambda (rho - 1/2), B = E Lambda (1/2). With an
/// interleaved label, additionally the composed decay p_C = p(twirl(Lambda_C
/// Lambda)) and p_tilde = p_C / p_ref.
GroundTruth true_params_from_gateset(const GateSet& gateset,
                                     const std::optional<std::string>& interleaved_gate = {});

struct VarianceDecomposition {
  double total = 0.0;    // qbar (1 - qbar) of the marginalized Bernoulli draw
  double between = 0.0;  // variance over sequences of the survival probability
  double within = 0.0;   // mean per-sequence Bernoulli variance
};

/// Empirical law-of-total-variance split over n random reference sequences of
/// length m; total == between + within holds as an algebraic identity.
VarianceDecomposition variance_decomposition(const GateSet& gateset, int m, int n_sequences,
                                             Rng& rng);

}  // namespace rbinfer
