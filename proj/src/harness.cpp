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

#include "qtomo/harness.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "qtomo/infogeo.hpp"
#include "qtomo/io.hpp"
#include "qtomo/param.hpp"
#include "qtomo/random.hpp"

namespace qtomo {

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-17) break;
  }
  return 0.5 * (lo + hi);
}

Ket4 basis_ket(double hh, double hv, double vh, double vv) {
  Ket4 k;
  k << hh, hv, vh, vv;
  return k;
}

CMatrix projector(const Ket4& k) { return k * k.adjoint(); }

const Ket4& phi_plus() {
  static const Ket4 k = basis_ket(std::numbers::sqrt2 / 2, 0.0, 0.0, std::numbers::sqrt2 / 2);
  return k;
}

const Ket4& psi_minus() {
  static const Ket4 k = basis_ket(0.0, std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2, 0.0);
  return k;
}

double werner_entropy(double p) {
  const double big = (1.0 + 3.0 * p) / 4.0;
  const double small = (1.0 - p) / 4.0;
  return -big * std::log2(big) - 3.0 * small * std::log2(small);
}

constexpr std::uint64_t kFitSeedSalt = 0xF17u;

}  // namespace

double solve_werner_weight(double target_bits) {
  return bisect([&](double p) { return werner_entropy(p) - target_bits; }, 0.0, 1.0 / 3.0);
}

double solve_binary_entropy_weight(double target_bits) {
  return bisect([&](double q) { return binary_entropy(q) - target_bits; }, 0.0, 0.5);
}

double solve_apss_angle(double mix_weight, double target_eof) {
  const double c = bisect([&](double x) { return eof_from_concurrence(x) - target_eof; }, 0.0, 1.0);
  return 0.5 * std::asin(c / (1.0 - 2.0 * mix_weight));
}

CMatrix product_rotation(double tilt, double phase) {
  Eigen::Matrix2cd ry;
  ry << std::cos(tilt / 2), -std::sin(tilt / 2), std::sin(tilt / 2), std::cos(tilt / 2);
  Eigen::Matrix2cd rz = Eigen::Matrix2cd::Zero();
  rz(0, 0) = std::polar(1.0, -phase / 2);
  rz(1, 1) = std::polar(1.0, phase / 2);
  const Eigen::Matrix2cd u = rz * ry;
  CMatrix out(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) out(2 * a + c, 2 * b + d) = u(a, b) * u(c, d);
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"APSS", "HES", "VNMS"};
  return names;
}

PresetState make_preset(const std::string& name) {
  CMatrix rho;
  int k_true = 0;
  if (name == "VNMS") {
    const double p = kVnmsWernerWeight;
    rho = p * projector(phi_plus()) + (1.0 - p) * CMatrix::Identity(4, 4) / 4.0;
    k_true = 4;
  } else if (name == "HES") {
    const double q = kHesMixWeight;
    rho = (1.0 - q) * projector(phi_plus()) + q * projector(psi_minus());
    k_true = 2;
  } else if (name == "APSS") {
    const double q = kApssMixWeight;
    const double c = std::cos(kApssAngle);
    const double s = std::sin(kApssAngle);
    rho = (1.0 - q) * projector(basis_ket(0.0, c, s, 0.0)) + q * projector(basis_ket(0.0, s, -c, 0.0));
    const CMatrix u = product_rotation(kApssTilt, kApssPhase);
    rho = u * rho * u.adjoint();
    k_true = 2;
  } else {
    throw ContractError("unknown preset '" + name + "' (expected APSS, HES or VNMS)");
  }
  DensityMatrix dm(rho);
  return {name, dm, k_true, characterize(dm)};
}

std::string to_string(Strategy s) { return s == Strategy::kMleRank4 ? "MLE_rank4" : "MAICE"; }

Strategy strategy_from_string(const std::string& s) {
  if (s == "MLE_rank4") return Strategy::kMleRank4;
  if (s == "MAICE") return Strategy::kMaice;
  throw ContractError("unknown strategy '" + s + "' (expected MLE_rank4 or MAICE)");
}

TrialResult run_trial(const DensityMatrix& rho_true, double C, double t, Strategy strategy,
                      std::uint64_t seed, const ProjectorSet& ps, const FitOptions& fit) {
  const CountRecord rec = sample_counts(rho_true, C, t, ps, seed);
  FitOptions opts = fit;
  opts.seed = derive_seed(seed, {kFitSeedSalt});
  if (strategy == Strategy::kMleRank4) {
    const RankFit f = mle_fit(rec, ps, 4, opts);
    DensityMatrix rho_hat = to_state(f.theta_hat).rho;
    const double hb = 1.0 - fidelity(rho_true, rho_hat);
    return {std::move(rho_hat), 4, hb};
  }
  const MaiceResult m = maice_fit(rec, ps, opts);
  return {m.rho_hat, m.selected_k, 1.0 - fidelity(rho_true, m.rho_hat)};
}

void ExperimentConfig::validate() const {
  if (r < 2) throw ContractError("experiment needs r >= 2 trials");
  if (!(C > 0.0)) throw ContractError("C must be positive");
  if (t_grid.empty()) throw ContractError("t_grid is empty");
  for (double t : t_grid) {
    if (!(t > 0.0)) throw ContractError("acquisition times must be positive");
  }
  if (strategies.empty()) throw ContractError("no strategies selected");
  if (rho.dim() != 4) throw ContractError("experiment state must be two-qubit");
  if (k_true < 0 || k_true > 4) throw ContractError("k_true must be 0..4");
  fit.validate();
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys{"preset", "rho", "state_name", "C", "t_grid", "r",
                                           "master_seed", "strategies", "projector_file"};
  if (!j.is_object()) throw ContractError("experiment config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw ContractError("unknown config key '" + key + "'");
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("preset") == j.contains("rho")) {
      throw ContractError("config needs exactly one of 'preset' or 'rho'");
    }
    if (j.contains("preset")) {
      const PresetState ps = make_preset(j.at("preset").get<std::string>());
      cfg.state_name = ps.name;
      cfg.rho = ps.rho;
      cfg.k_true = ps.k_true;
    } else {
      cfg.rho = density_matrix_from_json(j.at("rho"));
      cfg.state_name = j.value("state_name", std::string("custom"));
    }
    if (j.contains("C")) cfg.C = j.at("C").get<double>();
    if (j.contains("t_grid")) cfg.t_grid = j.at("t_grid").get<std::vector<double>>();
    if (j.contains("r")) cfg.r = j.at("r").get<int>();
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("strategies")) {
      cfg.strategies.clear();
      for (const auto& s : j.at("strategies")) cfg.strategies.push_back(strategy_from_string(s.get<std::string>()));
    }
    if (j.contains("projector_file")) cfg.projector_file = j.at("projector_file").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("malformed experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t t_index, Strategy s, std::size_t trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(t_index), static_cast<std::uint64_t>(s),
                              static_cast<std::uint64_t>(trial)});
}

int threads_from_env() {
  const char* v = std::getenv("TOMO_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 0) throw ContractError("TOMO_THREADS must be a nonnegative integer");
  return static_cast<int>(n);
}

namespace {

struct Task {
  std::size_t t_index;
  Strategy strategy;
  std::size_t trial;
};

struct Outcome {
  double half_bures = 0.0;
  int selected_k = 0;
  bool failed = false;
  std::string error;
};

struct Plan {
  ProjectorSet ps;
  std::vector<Task> tasks;
};

Plan make_plan(const ExperimentConfig& cfg) {
  cfg.validate();
  Plan plan{cfg.projector_file ? load_projectors(*cfg.projector_file) : default_projectors(), {}};
  for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
    for (Strategy s : cfg.strategies) {
      for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.r); ++i) plan.tasks.push_back({ti, s, i});
    }
  }
  return plan;
}

Outcome run_task(const ExperimentConfig& cfg, const ProjectorSet& ps, const Task& task) {
  Outcome out;
  const std::uint64_t seed = trial_seed(cfg.master_seed, task.t_index, task.strategy, task.trial);
  try {
    const TrialResult tr = run_trial(cfg.rho, cfg.C, cfg.t_grid[task.t_index], task.strategy, seed, ps, cfg.fit);
    out.half_bures = tr.half_bures;
    out.selected_k = tr.selected_k;
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

ExperimentReport aggregate(const ExperimentConfig& cfg, const Plan& plan, const std::vector<Outcome>& outcomes) {
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].failed) {
      const Task& t = plan.tasks[i];
      const std::uint64_t seed = trial_seed(cfg.master_seed, t.t_index, t.strategy, t.trial);
      throw TrialFailure("trial with seed " + std::to_string(seed) + " failed: " + outcomes[i].error, seed);
    }
  }
  const int k_true = cfg.k_true > 0 ? cfg.k_true : characterize(cfg.rho).rank;
  const RankKParams theta0 = project_to_rank(cfg.rho, k_true, cfg.C);

  ExperimentReport rep;
  std::size_t idx = 0;
  const auto r = static_cast<std::size_t>(cfg.r);
  for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
    const double ct = cfg.C * cfg.t_grid[ti];
    const double bound_half = cr_bound_bures(theta0, plan.ps, ct) / 2.0;
    for (Strategy s : cfg.strategies) {
      ReportRow row{cfg.state_name, ct, to_string(s), 0.0, 0.0, bound_half, {0, 0, 0, 0}};
      double sum = 0.0;
      for (std::size_t i = 0; i < r; ++i) {
        const Outcome& o = outcomes[idx + i];
        sum += o.half_bures;
        row.rank_histogram[static_cast<std::size_t>(o.selected_k - 1)] += 1;
      }
      row.mean_half_bures = sum / static_cast<double>(r);
      double ss = 0.0;
      for (std::size_t i = 0; i < r; ++i) {
        const double d = outcomes[idx + i].half_bures - row.mean_half_bures;
        ss += d * d;
      }
      row.std_half_bures = std::sqrt(ss / static_cast<double>(r - 1));
      rep.rows.push_back(std::move(row));
      idx += r;
    }
  }
  return rep;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads) {
  const Plan plan = make_plan(cfg);
  if (threads <= 0) threads = threads_from_env();
  if (threads <= 0) threads = omp_get_max_threads();
  std::vector<Outcome> outcomes(plan.tasks.size());
  const auto n = static_cast<std::int64_t>(plan.tasks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) {
    outcomes[static_cast<std::size_t>(i)] = run_task(cfg, plan.ps, plan.tasks[static_cast<std::size_t>(i)]);
  }
  return aggregate(cfg, plan, outcomes);
}

ExperimentReport run_experiment_serial(const ExperimentConfig& cfg) {
  const Plan plan = make_plan(cfg);
  std::vector<Outcome> outcomes;
  outcomes.reserve(plan.tasks.size());
  for (const Task& task : plan.tasks) outcomes.push_back(run_task(cfg, plan.ps, task));
  return aggregate(cfg, plan, outcomes);
}

namespace {

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

constexpr const char* kCsvHeader =
    "state,Ct,strategy,mean_half_bures,std_half_bures,cr_bound_half,rank1,rank2,rank3,rank4";

}  // namespace

std::string report_csv(const ExperimentReport& rep) {
  std::ostringstream out;
  out << "# trial seed = derive_seed(master_seed, {t_index, strategy_id (MLE_rank4=0, MAICE=1), trial_index}); "
         "derive_seed chains splitmix64: h = mix(master); h = mix(h ^ mix(part)) per part\n";
  out << kCsvHeader << '\n';
  for (const auto& row : rep.rows) {
    out << row.state << ',' << sci(row.Ct) << ',' << row.strategy << ',' << sci(row.mean_half_bures) << ','
        << sci(row.std_half_bures) << ',' << sci(row.cr_bound_half);
    for (int c : row.rank_histogram) out << ',' << c;
    out << '\n';
  }
  return out.str();
}

void emit_report(const ExperimentReport& rep, const std::string& path) { write_text_file(path, report_csv(rep)); }

ExperimentReport parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  ExperimentReport rep;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw ContractError("unexpected report header: " + line);
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw ContractError("report row must have 10 columns: " + line);
    ReportRow row{f[0], std::stod(f[1]), f[2], std::stod(f[3]), std::stod(f[4]), std::stod(f[5]),
                  {std::stoi(f[6]), std::stoi(f[7]), std::stoi(f[8]), std::stoi(f[9])}};
    rep.rows.push_back(std::move(row));
  }
  if (!header_seen) throw ContractError("report has no header");
  return rep;
}

}  // namespace qtomo
