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

#include "rbinfer/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rbinfer/errors.hpp"
#include "rbinfer/fisher.hpp"
#include "rbinfer/lsf.hpp"

namespace rbinfer {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

// RNG lanes used to split the master seed; fixed so reruns are identical.
enum Lane : std::uint64_t {
  kLaneTruth = 1,
  kLaneData = 2,
  kLaneSmc = 3,
  kLaneGuess = 4,
  kLaneBim = 5,
};

std::string fmt(double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

std::vector<int> iota_range(int first, int last, int step = 1) {
  std::vector<int> out;
  for (int v = first; v <= last; v += step) out.push_back(v);
  return out;
}

std::vector<double> real_range(double first, double last, double step) {
  std::vector<double> out;
  for (double v = first; v <= last + 1e-12; v += step) out.push_back(v);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Per-shot outcome streams, one vector per design, generated from the
// zeroth-order model. The harness always samples at shot granularity so the
// same draws feed both estimators regardless of how updates are batched.
std::vector<std::vector<int>> model_outcomes(const ModelParams& x_true,
                                             std::span<const WeightedDesign> designs, Rng& rng) {
  std::vector<std::vector<int>> outcomes;
  outcomes.reserve(designs.size());
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (const auto& wd : designs) {
    const double q = survival_probability(x_true, wd.design);
    std::vector<int> shots(std::size_t(wd.shots));
    for (auto& s : shots) s = uniform(rng) < q ? 1 : 0;
    outcomes.push_back(std::move(shots));
  }
  return outcomes;
}

std::vector<std::vector<int>> gate_outcomes(const GateSet& gateset,
                                            std::span<const WeightedDesign> designs,
                                            const std::string& interleaved_gate, Rng& rng) {
  std::vector<SequenceRecord> records;
  sample_gate_data(gateset, designs, interleaved_gate, rng, &records);
  std::vector<std::vector<int>> outcomes;
  outcomes.reserve(designs.size());
  std::size_t cursor = 0;
  for (const auto& wd : designs) {
    std::vector<int> shots(std::size_t(wd.shots));
    for (auto& s : shots) s = records[cursor++].outcome;
    outcomes.push_back(std::move(shots));
  }
  return outcomes;
}

std::vector<FitPoint> fit_points(std::span<const WeightedDesign> designs,
                                 const std::vector<std::vector<int>>& outcomes, Mode mode) {
  std::vector<FitPoint> points;
  for (std::size_t i = 0; i < designs.size(); ++i) {
    if (designs[i].design.mode != mode) continue;
    std::int64_t survived = 0;
    for (int s : outcomes[i]) survived += s;
    points.push_back(FitPoint{designs[i].design.m,
                              double(survived) / double(designs[i].shots), designs[i].shots});
  }
  return points;
}

struct TrialOutcome {
  bool failed = false;
  std::string error_category;
  Eigen::Vector4d sq_err = Eigen::Vector4d::Zero();
  Eigen::Vector4d estimate = Eigen::Vector4d::Zero();
  double posterior_var_trace = std::numeric_limits<double>::quiet_NaN();
  double posterior_ptilde_var = std::numeric_limits<double>::quiet_NaN();
  SmcDiagnostics diagnostics;
  Eigen::Vector4d guess = Eigen::Vector4d::Constant(std::numeric_limits<double>::quiet_NaN());
};

TrialOutcome run_smc_trial(const PriorSpec& prior, const Dataset& dataset,
                           const SmcConfig& config, const ModelParams& truth,
                           ParticleCloud* final_cloud = nullptr) {
  TrialOutcome out;
  try {
    const SmcResult result = run_smc(prior, dataset, config, final_cloud);
    const Eigen::Vector4d delta = result.estimate.to_vector() - truth.to_vector();
    out.sq_err = delta.cwiseProduct(delta);
    out.estimate = result.estimate.to_vector();
    out.posterior_var_trace = result.covariance.trace();
    out.posterior_ptilde_var = result.covariance(0, 0);
    out.diagnostics = result.diagnostics;
  } catch (const Error& err) {
    out.failed = true;
    out.error_category = to_string(err.category());
  }
  return out;
}

TrialOutcome run_lsf_trial(const PriorSpec& prior, std::span<const WeightedDesign> designs,
                           const std::vector<std::vector<int>>& outcomes,
                           const ModelParams& truth, Rng& guess_rng) {
  TrialOutcome out;
  const ModelParams guess = sample_prior(prior, guess_rng);
  out.guess = guess.to_vector();
  try {
    const auto ref_points = fit_points(designs, outcomes, Mode::reference);
    const auto int_points = fit_points(designs, outcomes, Mode::interleaved);
    const LsfEstimate lsf = lsf_interleaved_estimate(ref_points, int_points, guess);
    const Eigen::Vector4d delta = lsf.estimate.to_vector() - truth.to_vector();
    out.sq_err = delta.cwiseProduct(delta);
    out.estimate = lsf.estimate.to_vector();
  } catch (const Error& err) {
    out.failed = true;
    out.error_category = to_string(err.category());
  }
  return out;
}

void append_trial_row(std::string& csv, const std::string& coord_text, int trial,
                      const char* estimator, const TrialOutcome& t) {
  csv += coord_text + "," + std::to_string(trial) + "," + estimator + "," +
         (t.failed ? "1" : "0") + "," + t.error_category;
  for (int i = 0; i < 4; ++i) csv += "," + fmt(t.sq_err[i]);
  csv += "," + fmt(t.sq_err.sum()) + "," + fmt(t.posterior_var_trace) + "," +
         fmt(t.diagnostics.min_ess) + "," + std::to_string(t.diagnostics.resample_count) + "," +
         (t.diagnostics.ess_warning ? "1" : "0");
  for (int i = 0; i < 4; ++i) csv += "," + fmt(t.guess[i]);
  csv += "\n";
}

const char* kTrialHeaderTail =
    ",trial,estimator,failed,error_category,sq_err_ptilde,sq_err_pref,sq_err_A,sq_err_B,"
    "sq_err_trace,posterior_var_trace,min_ess,resample_count,ess_warning,"
    "guess_ptilde,guess_pref,guess_A,guess_B\n";

Json model_params_json(const ModelParams& x) {
  return Json::array({x.p_tilde, x.p_ref, x.A, x.B});
}

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["scenario"] = std::string(to_string(c.scenario));
  j["prior"] = {{"mean", model_params_json(c.prior.mean)},
                {"sigma", Json(c.prior.sigma)}};
  if (c.true_params) j["true_params"] = model_params_json(*c.true_params);
  if (c.noise) {
    Json per_gate = Json::object();
    for (const auto& [label, gn] : c.noise->per_gate) {
      Json entry = Json::object();
      if (gn.depolarizing) entry["depolarizing"] = *gn.depolarizing;
      if (gn.overrotation) entry["overrotation"] = *gn.overrotation;
      per_gate[label] = entry;
    }
    j["noise"] = {{"depolarizing", c.noise->depolarizing},
                  {"overrotation", c.noise->overrotation},
                  {"noise_before_gate", c.noise->noise_before_gate},
                  {"per_gate", per_gate}};
  }
  j["reference_lengths"] = c.reference_lengths;
  j["interleaved_lengths"] = c.interleaved_lengths;
  j["k_values"] = c.k_values;
  j["mmax_values"] = c.mmax_values;
  j["k_fixed"] = c.k_fixed;
  j["n_trials"] = c.n_trials;
  j["smc"] = {{"n_particles", c.smc.n_particles},
              {"resample_threshold", c.smc.resample_threshold},
              {"liu_west_a", c.smc.liu_west_a}};
  j["update_chunk_shots"] = c.update_chunk_shots;
  j["bim_samples"] = c.bim_samples;
  j["interleaved_gate"] = c.interleaved_gate;
  j["gate_repetitions"] = c.gate_repetitions;
  j["gate_bad_reference_lengths"] = c.gate_bad_reference_lengths;
  j["gate_bad_interleaved_lengths"] = c.gate_bad_interleaved_lengths;
  j["gate_bad_shots"] = c.gate_bad_shots;
  j["gate_good_reference_lengths"] = c.gate_good_reference_lengths;
  j["gate_good_interleaved_lengths"] = c.gate_good_interleaved_lengths;
  j["gate_good_shots"] = c.gate_good_shots;
  j["bad_prior_offset"] = Json(c.bad_prior_offset);
  j["landscape_p_tilde"] = c.landscape_p_tilde;
  j["landscape_p_ref"] = c.landscape_p_ref;
  j["landscape_a_values"] = c.landscape_a_values;
  j["landscape_b_values"] = c.landscape_b_values;
  j["landscape_f_values"] = c.landscape_f_values;
  j["landscape_m_max"] = c.landscape_m_max;
  j["seed"] = c.seed;
  j["output_path"] = c.output_path;
  return j;
}

std::string metadata_json(const ExperimentConfig& config, const Json& extra = Json::object()) {
  Json meta;
  meta["tool"] = "rbinfer";
  meta["version"] = kVersion;
  meta["scenario"] = std::string(to_string(config.scenario));
  meta["seed"] = config.seed;
  meta["config"] = config_json(config);
  for (const auto& [key, value] : extra.items()) meta[key] = value;
  return meta.dump(2) + "\n";
}

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCategory::config, message);
}

}  // namespace

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::risk_vs_k: return "risk_vs_k";
    case Scenario::risk_vs_mmax: return "risk_vs_mmax";
    case Scenario::gate_study: return "gate_study";
    case Scenario::fisher_landscape: return "fisher_landscape";
  }
  return "unknown";
}

std::optional<Scenario> scenario_from_string(std::string_view text) {
  if (text == "risk_vs_k" || text == "risk_vs_K") return Scenario::risk_vs_k;
  if (text == "risk_vs_mmax") return Scenario::risk_vs_mmax;
  if (text == "gate_study") return Scenario::gate_study;
  if (text == "fisher_landscape") return Scenario::fisher_landscape;
  return std::nullopt;
}

ExperimentConfig default_config(Scenario scenario) {
  ExperimentConfig config;
  config.scenario = scenario;
  config.reference_lengths = iota_range(1, 100);
  config.interleaved_lengths = iota_range(1, 50);
  config.gate_bad_reference_lengths = iota_range(1, 191, 10);
  config.gate_bad_interleaved_lengths = iota_range(2, 192, 10);
  config.gate_good_reference_lengths = iota_range(1, 91, 10);
  config.gate_good_interleaved_lengths = iota_range(2, 192, 10);
  config.landscape_a_values = real_range(0.05, 0.50, 0.05);
  config.landscape_b_values = real_range(0.05, 0.70, 0.05);
  if (scenario == Scenario::gate_study) {
    // Chunked updates plus a broader resampling kernel keep the filter able
    // to migrate when the prior is badly placed.
    config.update_chunk_shots = 20;
    config.smc.liu_west_a = 0.9;
    if (!config.noise) {
      NoiseConfig noise;
      noise.depolarizing = 0.004;
      noise.per_gate["X"] = GateNoise{0.002, std::nullopt};
      config.noise = noise;
    }
  }
  return config;
}

ExperimentConfig load_config_text(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw Error(ErrorCategory::config, std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), "config root must be a JSON object");
  const auto scenario_it = j.find("scenario");
  require(scenario_it != j.end() && scenario_it->is_string(),
          "config requires a string 'scenario' field");
  const auto scenario = scenario_from_string(scenario_it->get<std::string>());
  require(scenario.has_value(), "unknown scenario: " + scenario_it->get<std::string>());

  ExperimentConfig config = default_config(*scenario);

  auto parse_params = [](const Json& value, const char* what) {
    require(value.is_array() && value.size() == 4,
            std::string(what) + " must be an array of 4 numbers");
    return ModelParams{value[0].get<double>(), value[1].get<double>(), value[2].get<double>(),
                       value[3].get<double>()};
  };

  for (const auto& [key, value] : j.items()) {
    if (key == "scenario") {
      continue;
    } else if (key == "prior") {
      require(value.is_object(), "prior must be an object");
      for (const auto& [pk, pv] : value.items()) {
        if (pk == "mean") {
          config.prior.mean = parse_params(pv, "prior.mean");
        } else if (pk == "sigma") {
          if (pv.is_number()) {
            config.prior.sigma.fill(pv.get<double>());
          } else {
            require(pv.is_array() && pv.size() == 4, "prior.sigma must be a number or 4-array");
            for (int i = 0; i < 4; ++i) config.prior.sigma[std::size_t(i)] = pv[i].get<double>();
          }
        } else {
          throw Error(ErrorCategory::config, "unknown prior key: " + pk);
        }
      }
    } else if (key == "true_params") {
      config.true_params = parse_params(value, "true_params");
    } else if (key == "noise") {
      require(value.is_object(), "noise must be an object");
      NoiseConfig noise;
      for (const auto& [nk, nv] : value.items()) {
        if (nk == "depolarizing") {
          noise.depolarizing = nv.get<double>();
        } else if (nk == "overrotation") {
          noise.overrotation = nv.get<double>();
        } else if (nk == "noise_before_gate") {
          noise.noise_before_gate = nv.get<bool>();
        } else if (nk == "per_gate") {
          require(nv.is_object(), "noise.per_gate must be an object");
          for (const auto& [label, gv] : nv.items()) {
            GateNoise gn;
            for (const auto& [gk, gvv] : gv.items()) {
              if (gk == "depolarizing") gn.depolarizing = gvv.get<double>();
              else if (gk == "overrotation") gn.overrotation = gvv.get<double>();
              else throw Error(ErrorCategory::config, "unknown per_gate key: " + gk);
            }
            noise.per_gate[label] = gn;
          }
        } else {
          throw Error(ErrorCategory::config, "unknown noise key: " + nk);
        }
      }
      config.noise = noise;
    } else if (key == "reference_lengths") {
      config.reference_lengths = value.get<std::vector<int>>();
    } else if (key == "interleaved_lengths") {
      config.interleaved_lengths = value.get<std::vector<int>>();
    } else if (key == "k_values") {
      config.k_values = value.get<std::vector<std::int64_t>>();
    } else if (key == "mmax_values") {
      config.mmax_values = value.get<std::vector<int>>();
    } else if (key == "k_fixed") {
      config.k_fixed = value.get<std::int64_t>();
    } else if (key == "n_trials") {
      config.n_trials = value.get<int>();
    } else if (key == "smc") {
      require(value.is_object(), "smc must be an object");
      for (const auto& [sk, sv] : value.items()) {
        if (sk == "n_particles") config.smc.n_particles = sv.get<int>();
        else if (sk == "resample_threshold") config.smc.resample_threshold = sv.get<double>();
        else if (sk == "liu_west_a") config.smc.liu_west_a = sv.get<double>();
        else throw Error(ErrorCategory::config, "unknown smc key: " + sk);
      }
    } else if (key == "update_chunk_shots") {
      config.update_chunk_shots = value.get<std::int64_t>();
    } else if (key == "bim_samples") {
      config.bim_samples = value.get<int>();
    } else if (key == "interleaved_gate") {
      config.interleaved_gate = value.get<std::string>();
    } else if (key == "gate_repetitions") {
      config.gate_repetitions = value.get<int>();
    } else if (key == "gate_bad_reference_lengths") {
      config.gate_bad_reference_lengths = value.get<std::vector<int>>();
    } else if (key == "gate_bad_interleaved_lengths") {
      config.gate_bad_interleaved_lengths = value.get<std::vector<int>>();
    } else if (key == "gate_bad_shots") {
      config.gate_bad_shots = value.get<std::int64_t>();
    } else if (key == "gate_good_reference_lengths") {
      config.gate_good_reference_lengths = value.get<std::vector<int>>();
    } else if (key == "gate_good_interleaved_lengths") {
      config.gate_good_interleaved_lengths = value.get<std::vector<int>>();
    } else if (key == "gate_good_shots") {
      config.gate_good_shots = value.get<std::int64_t>();
    } else if (key == "bad_prior_offset") {
      require(value.is_array() && value.size() == 4, "bad_prior_offset must be a 4-array");
      for (int i = 0; i < 4; ++i) config.bad_prior_offset[std::size_t(i)] = value[i].get<double>();
    } else if (key == "landscape_p_tilde") {
      config.landscape_p_tilde = value.get<double>();
    } else if (key == "landscape_p_ref") {
      config.landscape_p_ref = value.get<double>();
    } else if (key == "landscape_a_values") {
      config.landscape_a_values = value.get<std::vector<double>>();
    } else if (key == "landscape_b_values") {
      config.landscape_b_values = value.get<std::vector<double>>();
    } else if (key == "landscape_f_values") {
      config.landscape_f_values = value.get<std::vector<double>>();
    } else if (key == "landscape_m_max") {
      config.landscape_m_max = value.get<int>();
    } else if (key == "seed") {
      config.seed = value.get<std::uint64_t>();
    } else if (key == "output_path") {
      config.output_path = value.get<std::string>();
    } else {
      throw Error(ErrorCategory::config, "unknown config key: " + key);
    }
  }

  require(config.n_trials >= 1, "n_trials must be >= 1");
  require(config.gate_repetitions >= 1, "gate_repetitions must be >= 1");
  require(!config.k_values.empty(), "k_values must be nonempty");
  require(!config.mmax_values.empty(), "mmax_values must be nonempty");
  require(!config.reference_lengths.empty(), "reference_lengths must be nonempty");
  require(!config.interleaved_lengths.empty(), "interleaved_lengths must be nonempty");
  validate(config.prior);
  return config;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_config_text(buffer.str());
}

std::string config_to_json(const ExperimentConfig& config) {
  return config_json(config).dump(2) + "\n";
}

std::string write_dataset(const Dataset& dataset) {
  std::string out = "mode,m,shots,survivals\n";
  for (const Datum& d : dataset) {
    out += std::string(to_string(d.design.mode)) + "," + std::to_string(d.design.m) + "," +
           std::to_string(d.shots) + "," + std::to_string(d.survivals) + "\n";
  }
  return out;
}

Dataset read_dataset_text(const std::string& text) {
  Dataset dataset;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line_number == 1 && line.rfind("mode,", 0) == 0) continue;  // header
    std::istringstream fields(line);
    std::string mode_text, m_text, shots_text, survivals_text;
    if (!std::getline(fields, mode_text, ',') || !std::getline(fields, m_text, ',') ||
        !std::getline(fields, shots_text, ',') || !std::getline(fields, survivals_text)) {
      throw Error(ErrorCategory::io,
                  "dataset line " + std::to_string(line_number) + " is not mode,m,shots,survivals");
    }
    const auto mode = mode_from_string(mode_text);
    if (!mode) {
      throw Error(ErrorCategory::io, "unknown mode on dataset line " + std::to_string(line_number));
    }
    try {
      Datum d{{std::stoi(m_text), *mode}, std::stoll(shots_text), std::stoll(survivals_text)};
      if (d.shots < 1 || d.survivals < 0 || d.survivals > d.shots || d.design.m < 0) {
        throw std::invalid_argument("range");
      }
      dataset.push_back(d);
    } catch (const std::exception&) {
      throw Error(ErrorCategory::io,
                  "invalid numeric fields on dataset line " + std::to_string(line_number));
    }
  }
  return dataset;
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open dataset file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return read_dataset_text(buffer.str());
}

std::vector<WeightedDesign> sorted_designs(const std::vector<int>& reference_lengths,
                                           const std::vector<int>& interleaved_lengths,
                                           std::int64_t shots) {
  std::vector<WeightedDesign> designs;
  designs.reserve(reference_lengths.size() + interleaved_lengths.size());
  for (int m : reference_lengths) designs.push_back({{m, Mode::reference}, shots});
  for (int m : interleaved_lengths) designs.push_back({{m, Mode::interleaved}, shots});
  std::sort(designs.begin(), designs.end(), [](const WeightedDesign& a, const WeightedDesign& b) {
    if (a.design.m != b.design.m) return a.design.m < b.design.m;
    return a.design.mode == Mode::reference && b.design.mode == Mode::interleaved;
  });
  return designs;
}

Dataset chunked_dataset(std::span<const WeightedDesign> designs,
                        const std::vector<std::vector<int>>& outcomes,
                        std::int64_t chunk_shots) {
  if (designs.size() != outcomes.size()) {
    throw Error(ErrorCategory::domain, "designs and outcome streams differ in length");
  }
  Dataset dataset;
  if (chunk_shots <= 0) {
    for (std::size_t i = 0; i < designs.size(); ++i) {
      Datum d{designs[i].design, designs[i].shots, 0};
      for (int s : outcomes[i]) d.survivals += s;
      dataset.push_back(d);
    }
    return dataset;
  }
  // Repeated ascending passes: every pass consumes chunk_shots fresh shots
  // from each design in order.
  std::vector<std::size_t> cursor(designs.size(), 0);
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (std::size_t i = 0; i < designs.size(); ++i) {
      const auto& stream = outcomes[i];
      if (cursor[i] >= stream.size()) continue;
      const std::size_t take =
          std::min<std::size_t>(std::size_t(chunk_shots), stream.size() - cursor[i]);
      Datum d{designs[i].design, std::int64_t(take), 0};
      for (std::size_t k = 0; k < take; ++k) d.survivals += stream[cursor[i] + k];
      cursor[i] += take;
      dataset.push_back(d);
      progressed = true;
    }
  }
  return dataset;
}

namespace {

Artifact run_risk(const ExperimentConfig& config, bool sweep_k) {
  const std::string coord_label = sweep_k ? "K" : "m_max";
  Artifact artifact;
  artifact.main_csv = "estimator," + coord_label +
                      ",mse_trace,mse_ptilde,bcrb_trace,mean_posterior_var_trace,n_failed\n";
  artifact.trials_csv = coord_label + kTrialHeaderTail;

  const std::size_t n_coords = sweep_k ? config.k_values.size() : config.mmax_values.size();
  for (std::size_t ci = 0; ci < n_coords; ++ci) {
    std::int64_t coord, shots;
    std::vector<WeightedDesign> designs;
    if (sweep_k) {
      coord = config.k_values[ci];
      shots = coord;
      designs = sorted_designs(config.reference_lengths, config.interleaved_lengths, shots);
    } else {
      coord = config.mmax_values[ci];
      shots = config.k_fixed;
      const auto grid = iota_range(1, int(coord), 10);
      designs = sorted_designs(grid, grid, shots);
    }

    Rng bim_rng = make_rng(config.seed, kLaneBim, ci);
    const double bound_trace =
        bcrb(config.prior, designs, config.bim_samples, bim_rng, true).trace();

    Eigen::Vector4d smc_sq_sum = Eigen::Vector4d::Zero();
    Eigen::Vector4d lsf_sq_sum = Eigen::Vector4d::Zero();
    double posterior_var_sum = 0.0;
    int smc_ok = 0, lsf_ok = 0, failed = 0;

    for (int trial = 0; trial < config.n_trials; ++trial) {
      const std::uint64_t trial_seed = derive_seed(config.seed, 100 + ci, std::uint64_t(trial));
      Rng truth_rng = make_rng(trial_seed, kLaneTruth);
      const ModelParams x_true =
          config.true_params ? *config.true_params : sample_prior(config.prior, truth_rng);

      Rng data_rng = make_rng(trial_seed, kLaneData);
      const auto outcomes = model_outcomes(x_true, designs, data_rng);
      const Dataset smc_data = chunked_dataset(designs, outcomes, config.update_chunk_shots);

      SmcConfig smc_config = config.smc;
      smc_config.rng_seed = derive_seed(trial_seed, kLaneSmc);
      const TrialOutcome smc_trial = run_smc_trial(config.prior, smc_data, smc_config, x_true);

      Rng guess_rng = make_rng(trial_seed, kLaneGuess);
      const TrialOutcome lsf_trial =
          run_lsf_trial(config.prior, designs, outcomes, x_true, guess_rng);

      append_trial_row(artifact.trials_csv, std::to_string(coord), trial, "SMC", smc_trial);
      append_trial_row(artifact.trials_csv, std::to_string(coord), trial, "LSF", lsf_trial);

      if (!smc_trial.failed) {
        smc_sq_sum += smc_trial.sq_err;
        posterior_var_sum += smc_trial.posterior_var_trace;
        ++smc_ok;
      } else {
        ++failed;
      }
      if (!lsf_trial.failed) {
        lsf_sq_sum += lsf_trial.sq_err;
        ++lsf_ok;
      } else {
        ++failed;
      }
    }

    const auto mse = [](const Eigen::Vector4d& sum, int n) {
      return n > 0 ? Eigen::Vector4d(sum / double(n))
                   : Eigen::Vector4d::Constant(std::numeric_limits<double>::quiet_NaN());
    };
    const Eigen::Vector4d smc_mse = mse(smc_sq_sum, smc_ok);
    const Eigen::Vector4d lsf_mse = mse(lsf_sq_sum, lsf_ok);
    const double mean_pv = smc_ok > 0 ? posterior_var_sum / double(smc_ok)
                                      : std::numeric_limits<double>::quiet_NaN();

    artifact.main_csv += "SMC," + std::to_string(coord) + "," + fmt(smc_mse.sum()) + "," +
                         fmt(smc_mse[0]) + "," + fmt(bound_trace) + "," + fmt(mean_pv) + "," +
                         std::to_string(failed) + "\n";
    artifact.main_csv += "LSF," + std::to_string(coord) + "," + fmt(lsf_mse.sum()) + "," +
                         fmt(lsf_mse[0]) + "," + fmt(bound_trace) + ",nan," +
                         std::to_string(failed) + "\n";
  }

  artifact.metadata_json = metadata_json(config);
  return artifact;
}

}  // namespace

Artifact run_risk_vs_k(const ExperimentConfig& config) {
  if (config.scenario != Scenario::risk_vs_k) {
    throw Error(ErrorCategory::config, "config scenario is not risk_vs_k");
  }
  return run_risk(config, true);
}

Artifact run_risk_vs_mmax(const ExperimentConfig& config) {
  if (config.scenario != Scenario::risk_vs_mmax) {
    throw Error(ErrorCategory::config, "config scenario is not risk_vs_mmax");
  }
  return run_risk(config, false);
}

Artifact run_gate_study(const ExperimentConfig& config) {
  if (config.scenario != Scenario::gate_study) {
    throw Error(ErrorCategory::config, "config scenario is not gate_study");
  }
  const NoiseConfig noise = config.noise.value_or(default_config(Scenario::gate_study).noise.value());
  const GateSet gateset = make_noisy_gateset(noise);
  const GroundTruth truth = true_params_from_gateset(gateset, config.interleaved_gate);
  const ModelParams x_true{truth.p_tilde.value_or(1.0), truth.p_ref, truth.A, truth.B};
  if (auto violation = support_violation(x_true)) {
    throw Error(ErrorCategory::config, "gate-set ground truth outside support: " + *violation);
  }

  Artifact artifact;
  artifact.main_csv = "scenario,row,ptilde,pref,A,B\n";
  artifact.trials_csv = std::string("scenario") + kTrialHeaderTail;
  artifact.extra_csv = "scenario,ptilde_bin_center,prior_density,posterior_density\n";

  struct ScenarioSpec {
    const char* name;
    PriorSpec prior;
    std::vector<WeightedDesign> designs;
  };

  PriorSpec bad_prior = config.prior;
  bad_prior.mean = ModelParams::from_vector(
      x_true.to_vector() - Eigen::Vector4d(config.bad_prior_offset[0], config.bad_prior_offset[1],
                                           config.bad_prior_offset[2], config.bad_prior_offset[3]));
  PriorSpec good_prior = config.prior;
  good_prior.mean = x_true;

  const std::vector<ScenarioSpec> scenarios{
      {"bad_prior", bad_prior,
       sorted_designs(config.gate_bad_reference_lengths, config.gate_bad_interleaved_lengths,
                      config.gate_bad_shots)},
      {"good_prior", good_prior,
       sorted_designs(config.gate_good_reference_lengths, config.gate_good_interleaved_lengths,
                      config.gate_good_shots)},
  };

  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    const auto& spec = scenarios[si];
    validate(spec.prior);

    std::array<std::vector<double>, 4> smc_estimates, lsf_estimates, smc_errors, lsf_errors;
    for (int rep = 0; rep < config.gate_repetitions; ++rep) {
      const std::uint64_t rep_seed = derive_seed(config.seed, 200 + si, std::uint64_t(rep));
      Rng data_rng = make_rng(rep_seed, kLaneData);
      const auto outcomes = gate_outcomes(gateset, spec.designs, config.interleaved_gate, data_rng);
      const Dataset smc_data = chunked_dataset(spec.designs, outcomes, config.update_chunk_shots);

      SmcConfig smc_config = config.smc;
      smc_config.rng_seed = derive_seed(rep_seed, kLaneSmc);
      ParticleCloud cloud;
      const TrialOutcome smc_trial =
          run_smc_trial(spec.prior, smc_data, smc_config, x_true, rep == 0 ? &cloud : nullptr);

      Rng guess_rng = make_rng(rep_seed, kLaneGuess);
      const TrialOutcome lsf_trial =
          run_lsf_trial(spec.prior, spec.designs, outcomes, x_true, guess_rng);

      append_trial_row(artifact.trials_csv, spec.name, rep, "SMC", smc_trial);
      append_trial_row(artifact.trials_csv, spec.name, rep, "LSF", lsf_trial);

      for (int i = 0; i < 4; ++i) {
        if (!smc_trial.failed) {
          smc_estimates[std::size_t(i)].push_back(smc_trial.estimate[i]);
          smc_errors[std::size_t(i)].push_back(std::sqrt(smc_trial.sq_err[i]));
        }
        if (!lsf_trial.failed) {
          lsf_estimates[std::size_t(i)].push_back(lsf_trial.estimate[i]);
          lsf_errors[std::size_t(i)].push_back(std::sqrt(lsf_trial.sq_err[i]));
        }
      }

      if (rep == 0 && !smc_trial.failed) {
        // Figs. 3-4 style summary: marginal prior vs posterior over p_tilde.
        const double sigma = spec.prior.sigma[0];
        const double lo = std::min(spec.prior.mean.p_tilde - 5.0 * sigma,
                                   x_true.p_tilde - 5.0 * sigma);
        const double hi = std::max(spec.prior.mean.p_tilde + 5.0 * sigma,
                                   x_true.p_tilde + 5.0 * sigma);
        constexpr int kBins = 60;
        const double width = (hi - lo) / kBins;
        std::vector<double> posterior_mass(kBins, 0.0);
        for (std::size_t pi = 0; pi < cloud.size(); ++pi) {
          const int bin = std::clamp(int((cloud.locations[pi].p_tilde - lo) / width), 0, kBins - 1);
          posterior_mass[std::size_t(bin)] += cloud.weights[pi];
        }
        for (int b = 0; b < kBins; ++b) {
          const double center = lo + (b + 0.5) * width;
          const double z = (center - spec.prior.mean.p_tilde) / sigma;
          const double prior_density =
              std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
          artifact.extra_csv += std::string(spec.name) + "," + fmt(center) + "," +
                                fmt(prior_density) + "," + fmt(posterior_mass[std::size_t(b)] / width) +
                                "\n";
        }
      }
    }

    const auto emit_row = [&](const char* row, const std::array<std::vector<double>, 4>& values) {
      artifact.main_csv += std::string(spec.name) + "," + row;
      for (int i = 0; i < 4; ++i) artifact.main_csv += "," + fmt(median(values[std::size_t(i)]));
      artifact.main_csv += "\n";
    };
    artifact.main_csv += std::string(spec.name) + ",True," + fmt(x_true.p_tilde) + "," +
                         fmt(x_true.p_ref) + "," + fmt(x_true.A) + "," + fmt(x_true.B) + "\n";
    emit_row("SMC", smc_estimates);
    emit_row("LSF", lsf_estimates);
    emit_row("SMC_error", smc_errors);
    emit_row("LSF_error", lsf_errors);
  }

  Json extra;
  extra["ground_truth"] = {{"p_tilde", truth.p_tilde.value_or(1.0)},
                           {"p_ref", truth.p_ref},
                           {"A", truth.A},
                           {"B", truth.B},
                           {"f_ave", truth.f_ave}};
  extra["bad_prior_sigma_distance"] = [&] {
    Eigen::Vector4d z;
    for (int i = 0; i < 4; ++i) {
      z[i] = config.bad_prior_offset[std::size_t(i)] / config.prior.sigma[std::size_t(i)];
    }
    return z.norm();
  }();
  artifact.metadata_json = metadata_json(config, extra);
  return artifact;
}

Artifact run_fisher_landscape(const ExperimentConfig& config) {
  if (config.scenario != Scenario::fisher_landscape) {
    throw Error(ErrorCategory::config, "config scenario is not fisher_landscape");
  }
  Artifact artifact;
  artifact.main_csv = "sweep,value,m_opt\n";
  for (double a : config.landscape_a_values) {
    const ModelParams x{config.landscape_p_tilde, config.landscape_p_ref, a, 0.5};
    const int m_opt = optimal_m(x, Mode::interleaved, 1, config.landscape_m_max);
    artifact.main_csv += "A," + fmt(a) + "," + std::to_string(m_opt) + "\n";
  }
  for (double b : config.landscape_b_values) {
    const ModelParams x{config.landscape_p_tilde, config.landscape_p_ref, 0.25, b};
    const int m_opt = optimal_m(x, Mode::interleaved, 1, config.landscape_m_max);
    artifact.main_csv += "B," + fmt(b) + "," + std::to_string(m_opt) + "\n";
  }
  for (double f : config.landscape_f_values) {
    artifact.main_csv += "large_d," + fmt(f) + "," + fmt(optimal_m_large_d(f, f)) + "\n";
  }
  artifact.metadata_json = metadata_json(config);
  return artifact;
}

Artifact run_scenario(const ExperimentConfig& config) {
  switch (config.scenario) {
    case Scenario::risk_vs_k: return run_risk_vs_k(config);
    case Scenario::risk_vs_mmax: return run_risk_vs_mmax(config);
    case Scenario::gate_study: return run_gate_study(config);
    case Scenario::fisher_landscape: return run_fisher_landscape(config);
  }
  throw Error(ErrorCategory::config, "unknown scenario");
}

void write_artifact(const Artifact& artifact, const std::string& path) {
  const auto write_file = [](const std::string& file_path, const std::string& contents) {
    std::ofstream out(file_path, std::ios::binary);
    if (!out) throw Error(ErrorCategory::io, "cannot write " + file_path);
    out << contents;
  };
  write_file(path, artifact.main_csv);
  if (!artifact.trials_csv.empty()) write_file(path + ".trials.csv", artifact.trials_csv);
  if (!artifact.extra_csv.empty()) write_file(path + ".hist.csv", artifact.extra_csv);
  write_file(path + ".meta.json", artifact.metadata_json);
}

}  // namespace rbinfer
