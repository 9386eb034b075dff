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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbinfer/gatesim.hpp"
#include "rbinfer/model.hpp"
#include "rbinfer/prior.hpp"
#include "rbinfer/smc.hpp"

namespace rbinfer {

enum class Scenario { risk_vs_k, risk_vs_mmax, gate_study, fisher_landscape };

std::string_view to_string(Scenario scenario);
std::optional<Scenario> scenario_from_string(std::string_view text);

/// Full description of one harness run. Defaults are desk-scale versions of
/// the published study grids; every field can be overridden from a JSON
/// config file and the effective values are echoed into the metadata
/// artifact.
struct ExperimentConfig {
  Scenario scenario = Scenario::risk_vs_k;

  PriorSpec prior{ModelParams{0.95, 0.95, 0.3, 0.5}, {0.01, 0.01, 0.01, 0.01}};
  std::optional<ModelParams> true_params;  // risk scenarios draw from the prior when unset
  std::optional<NoiseConfig> noise;        // gate study; defaults applied when unset

  // risk_vs_k: reference/interleaved length grids and the K sweep.
  std::vector<int> reference_lengths;    // default 1..100
  std::vector<int> interleaved_lengths;  // default 1..50
  std::vector<std::int64_t> k_values{1, 3, 10, 32, 100};

  // risk_vs_mmax: sweep of maximum length (grid {1, 11, ..., m_max}, both
  // modes) at fixed K.
  std::vector<int> mmax_values{21, 51, 91, 141, 191};
  std::int64_t k_fixed = 1000;

  int n_trials = 100;
  SmcConfig smc;
  // Number of shots folded into one Bayes update. 0 keeps one datum per
  // design; a positive value splits each design into chunks processed in
  // repeated ascending-m passes, which lets the resampler react gradually.
  std::int64_t update_chunk_shots = 0;
  int bim_samples = 10000;

  // gate_study settings.
  std::string interleaved_gate = "X";
  int gate_repetitions = 20;
  std::vector<int> gate_bad_reference_lengths;    // default {1, 11, ..., 191}
  std::vector<int> gate_bad_interleaved_lengths;  // default {2, 12, ..., 192}
  std::int64_t gate_bad_shots = 1000;
  std::vector<int> gate_good_reference_lengths;    // default {1, 11, ..., 91}
  std::vector<int> gate_good_interleaved_lengths;  // default {2, 12, ..., 192}
  std::int64_t gate_good_shots = 100;
  // Displacement of the intentionally bad prior mean below the truth,
  // 6.9 combined standard deviations at sigma = 0.01.
  std::array<double, 4> bad_prior_offset{0.0483, 0.0457, 0.0185, 0.0012};

  // fisher_landscape settings: scan anchors and grids.
  double landscape_p_tilde = 0.9988;
  double landscape_p_ref = 0.9978;
  std::vector<double> landscape_a_values;  // default 0.05..0.50 step 0.05 (B = 0.5)
  std::vector<double> landscape_b_values;  // default 0.05..0.70 step 0.05 (A = 0.25)
  std::vector<double> landscape_f_values{0.99, 0.995, 0.999, 0.9995, 0.9999};
  int landscape_m_max = 2000;

  std::uint64_t seed = 0;
  std::string output_path = "rbinfer_out.csv";
};

/// Scenario-appropriate defaults (fills the grids above and, for the gate
/// study, switches the resampler to a = 0.9 with 20-shot update chunks).
ExperimentConfig default_config(Scenario scenario);

/// Parses a JSON config. Unknown keys are rejected; missing keys keep the
/// scenario defaults. Throws ErrorCategory::config.
ExperimentConfig load_config_text(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

/// Deterministic artifacts of one scenario run. Identical config + seed
/// reproduce all three byte-for-byte (timing never enters the artifacts).
struct Artifact {
  std::string main_csv;
  std::string trials_csv;     // per-trial records; empty for fisher_landscape
  std::string extra_csv;      // gate study: p_tilde prior/posterior histogram
  std::string metadata_json;  // config echo, seed, version
};

Artifact run_risk_vs_k(const ExperimentConfig& config);
Artifact run_risk_vs_mmax(const ExperimentConfig& config);
Artifact run_gate_study(const ExperimentConfig& config);
Artifact run_fisher_landscape(const ExperimentConfig& config);
Artifact run_scenario(const ExperimentConfig& config);

/// Writes main_csv to `path`, plus sidecars `<path>.trials.csv`,
/// `<path>.hist.csv` and `<path>.meta.json` for the nonempty members.
void write_artifact(const Artifact& artifact, const std::string& path);

/// Dataset interchange format: header `mode,m,shots,survivals`, one record
/// per line, e.g. `reference,11,100,93`.
std::string write_dataset(const Dataset& dataset);
Dataset read_dataset_text(const std::string& text);
Dataset read_dataset_file(const std::string& path);

/// Sorts designs by (m, mode) with reference before interleaved, the order in
/// which the harness generates and processes data.
std::vector<WeightedDesign> sorted_designs(const std::vector<int>& reference_lengths,
                                           const std::vector<int>& interleaved_lengths,
                                           std::int64_t shots);

/// Splits per-shot outcomes into chunked data processed in repeated
/// ascending-(m, mode) passes. outcomes[i] must hold the per-shot outcomes of
/// designs[i].
Dataset chunked_dataset(std::span<const WeightedDesign> designs,
                        const std::vector<std::vector<int>>& outcomes,
                        std::int64_t chunk_shots);

}  // namespace rbinfer
