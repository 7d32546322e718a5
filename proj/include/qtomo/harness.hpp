// Copyright 2026 The qtomo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
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
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtomo/estimate.hpp"
#include "qtomo/measure.hpp"
#include "qtomo/qstate.hpp"

namespace qtomo {

struct PresetState {
  std::string name;
  DensityMatrix rho;
  int k_true;
  StateCharacter character;
};

// Mixture weights of the presets, frozen from the root finders below.
inline constexpr double kVnmsWernerWeight = 0.04880443634079883;
inline constexpr double kHesMixWeight = 0.09594248450745098;
inline constexpr double kApssMixWeight = 0.03357190382501;
inline constexpr double kApssAngle = 0.06168462285036692;
// APSS is rotated by the same single-qubit unitary on both photons so that
// no projector of the default set sees a zero rate.
inline constexpr double kApssTilt = 0.7;
inline constexpr double kApssPhase = 0.4;

/// Werner weight p giving entropy target_bits (p <= 1/3).
double solve_werner_weight(double target_bits);
/// Weight q in [0, 1/2] with binary entropy h(q) = target_bits.
double solve_binary_entropy_weight(double target_bits);
/// Angle eta with EoF((1 - 2 q) sin 2 eta) = target_eof.
double solve_apss_angle(double mix_weight, double target_eof);

/// u (x) u with u = Rz(phase) Ry(tilt), in the |HH>, |HV>, |VH>, |VV> basis.
CMatrix product_rotation(double tilt, double phase);

/// "APSS", "HES" or "VNMS".
PresetState make_preset(const std::string& name);
const std::vector<std::string>& preset_names();

enum class Strategy { kMleRank4, kMaice };
std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct TrialResult {
  DensityMatrix rho_hat;
  int selected_k;
  double half_bures;
};

/// Samples counts for seed, estimates with the strategy, returns 1 - F.
TrialResult run_trial(const DensityMatrix& rho_true, double C, double t, Strategy strategy,
                      std::uint64_t seed, const ProjectorSet& ps, const FitOptions& fit = {});

struct ExperimentConfig {
  std::string state_name;
  DensityMatrix rho = DensityMatrix::maximally_mixed(4);
  /// Rank of the model used for the bound; 0 = numerical rank of rho.
  int k_true = 0;
  double C = 500.0;
  std::vector<double> t_grid{0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
  int r = 200;
  std::uint64_t master_seed = 0;
  std::vector<Strategy> strategies{Strategy::kMleRank4, Strategy::kMaice};
  std::optional<std::string> projector_file;
  FitOptions fit;

  void validate() const;
};

/// Parses the config JSON ({"preset" | "rho", "C", "t_grid", "r",
/// "master_seed", "strategies", "projector_file"}); unknown keys are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct ReportRow {
  std::string state;
  double Ct;
  std::string strategy;
  double mean_half_bures;
  double std_half_bures;
  double cr_bound_half;
  std::array<int, 4> rank_histogram;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
};

/// Seed of one trial: derive_seed(master, {t_index, strategy_id, trial_index}).
std::uint64_t trial_seed(std::uint64_t master, std::size_t t_index, Strategy s, std::size_t trial);

/// Raised when a trial fails; carries the trial seed.
class TrialFailure : public std::runtime_error {
 public:
  TrialFailure(const std::string& what, std::uint64_t seed) : std::runtime_error(what), seed(seed) {}
  std::uint64_t seed;
};

/// OpenMP run. threads <= 0 means TOMO_THREADS, or the OpenMP default when unset/0.
ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads = 0);
/// Single-threaded reference with the same per-trial seeds and aggregation order.
ExperimentReport run_experiment_serial(const ExperimentConfig& cfg);

/// Worker count from TOMO_THREADS (0 or unset = auto).
int threads_from_env();

std::string report_csv(const ExperimentReport& rep);
void emit_report(const ExperimentReport& rep, const std::string& path);
ExperimentReport parse_report_csv(const std::string& text);

}  // namespace qtomo
