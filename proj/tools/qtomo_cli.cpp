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

// qtomo command line: simulate counts, fit states, evaluate Fisher
// information and bounds, and run Monte Carlo experiments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qtomo/estimate.hpp"
#include "qtomo/harness.hpp"
#include "qtomo/infogeo.hpp"
#include "qtomo/io.hpp"
#include "qtomo/measure.hpp"
#include "qtomo/param.hpp"
#include "qtomo/qstate.hpp"

namespace {

constexpr int kExitContract = 1;
constexpr int kExitIo = 2;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string projectors;
  std::string out;
};

struct StateSource {
  std::string state_file;
  std::string preset;
};

void add_state_source(CLI::App* cmd, StateSource& src) {
  auto* file = cmd->add_option("--state", src.state_file, "Density matrix JSON file");
  auto* preset = cmd->add_option("--preset", src.preset, "Preset name (APSS, HES, VNMS)");
  file->excludes(preset);
  preset->excludes(file);
}

qtomo::DensityMatrix load_state(const StateSource& src) {
  if (!src.preset.empty()) return qtomo::make_preset(src.preset).rho;
  if (src.state_file.empty()) throw qtomo::ContractError("one of --state or --preset is required");
  return qtomo::density_matrix_from_json(qtomo::read_json_file(src.state_file));
}

qtomo::ProjectorSet projector_set(const GlobalOptions& g) {
  return g.projectors.empty() ? qtomo::default_projectors() : qtomo::load_projectors(g.projectors);
}

void emit(const GlobalOptions& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
  } else {
    qtomo::write_text_file(g.out, text);
  }
}

int model_rank(const qtomo::DensityMatrix& rho, int requested) {
  if (requested != 0) return requested;
  return qtomo::characterize(rho).rank;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-qubit state tomography: MLE, AIC rank selection and Cramer-Rao bounds"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--projectors", g.projectors, "Projector set JSON (default: 16-setting tomography set)");
  app.add_option("--out", g.out, "Output path (stdout when omitted)");

  // presets
  auto* presets = app.add_subcommand("presets", "Write preset states as JSON files");
  std::string preset_name;
  presets->add_option("--name", preset_name, "Write only this preset");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Sample Poisson counts for a state");
  StateSource sim_src;
  double sim_C = 500.0;
  double sim_t = 1.0;
  add_state_source(simulate, sim_src);
  simulate->add_option("--C", sim_C, "Count rate scale")->capture_default_str();
  simulate->add_option("--t", sim_t, "Acquisition time")->capture_default_str();

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Fit a state to a count file");
  std::string counts_file;
  std::string rank = "maice";
  int n_starts = qtomo::FitOptions{}.n_starts;
  estimate->add_option("--counts", counts_file, "Count CSV (sidecar <csv>.json next to it)")->required();
  estimate->add_option("--rank", rank, "Model rank 1..4 or maice")
      ->check(CLI::IsMember({"1", "2", "3", "4", "maice"}))
      ->capture_default_str();
  estimate->add_option("--starts", n_starts, "Optimizer starts per rank")->capture_default_str();

  // fisher
  auto* fisher = app.add_subcommand("fisher", "Fisher report for a state or parameter vector");
  StateSource fisher_src;
  std::string params_file;
  int fisher_rank = 0;
  double fisher_C = 500.0;
  double fisher_t = 1.0;
  add_state_source(fisher, fisher_src);
  auto* params_opt = fisher->add_option("--params", params_file, "Parameter JSON {\"k\", \"theta\"}");
  params_opt->excludes("--state")->excludes("--preset");
  fisher->add_option("--rank", fisher_rank, "Model rank (default: numerical rank of the state)")
      ->check(CLI::Range(1, 4));
  fisher->add_option("--C", fisher_C, "Count rate scale")->capture_default_str();
  fisher->add_option("--t", fisher_t, "Acquisition time")->capture_default_str();

  // bound
  auto* bound = app.add_subcommand("bound", "Cramer-Rao bound on the Bures distance");
  StateSource bound_src;
  int bound_rank = 0;
  double bound_Ct = 0.0;
  add_state_source(bound, bound_src);
  bound->add_option("--Ct", bound_Ct, "Expected total count scale C*t")->required();
  bound->add_option("--rank", bound_rank, "Model rank (default: numerical rank of the state)")
      ->check(CLI::Range(1, 4));

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Monte Carlo comparison of MLE and MAICE");
  std::string config_file;
  int threads = -1;
  experiment->add_option("--config", config_file, "Experiment config JSON")->required();
  experiment->add_option("--threads", threads, "Worker threads (default: TOMO_THREADS, 0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitContract;
  }

  try {
    if (presets->parsed()) {
      nlohmann::json all = nlohmann::json::object();
      for (const auto& name : qtomo::preset_names()) {
        if (!preset_name.empty() && name != preset_name) continue;
        all[name] = qtomo::to_json(qtomo::make_preset(name).rho);
      }
      if (all.empty()) qtomo::make_preset(preset_name);  // throws for unknown names
      if (g.out.empty()) {
        std::cout << all.dump(2) << "\n";
      } else {
        std::filesystem::create_directories(g.out);
        for (const auto& [name, state] : all.items()) {
          qtomo::write_text_file((std::filesystem::path(g.out) / (name + ".json")).string(),
                                 state.dump(2) + "\n");
        }
      }
    } else if (simulate->parsed()) {
      if (g.out.empty()) throw qtomo::ContractError("simulate requires --out <counts.csv>");
      const auto ps = projector_set(g);
      const auto rec = qtomo::sample_counts(load_state(sim_src), sim_C, sim_t, ps, g.seed.value_or(0));
      qtomo::save_counts(g.out, rec, ps);
    } else if (estimate->parsed()) {
      const auto ps = projector_set(g);
      const auto rec = qtomo::load_counts(counts_file, ps);
      qtomo::FitOptions opts;
      opts.n_starts = n_starts;
      opts.seed = g.seed.value_or(rec.seed.value_or(0));
      const nlohmann::json report =
          rank == "maice" ? qtomo::fit_report_json(qtomo::maice_fit(rec, ps, opts))
                          : qtomo::fit_report_json(qtomo::mle_fit(rec, ps, std::stoi(rank), opts));
      emit(g, report.dump(2) + "\n");
    } else if (fisher->parsed()) {
      const auto ps = projector_set(g);
      std::optional<qtomo::RankKParams> p;
      if (!params_file.empty()) {
        p = qtomo::rank_k_params_from_json(qtomo::read_json_file(params_file));
      } else {
        const auto rho = load_state(fisher_src);
        p = qtomo::project_to_rank(rho, model_rank(rho, fisher_rank), fisher_C);
      }
      const auto fb = qtomo::fisher_bundle(*p, ps, fisher_t);
      emit(g, qtomo::fisher_report_json(fb, ps).dump(2) + "\n");
    } else if (bound->parsed()) {
      const auto ps = projector_set(g);
      const auto rho = load_state(bound_src);
      const auto p0 = qtomo::project_to_rank(rho, model_rank(rho, bound_rank));
      emit(g, format_double(qtomo::cr_bound_bures(p0, ps, bound_Ct)) + "\n");
    } else if (experiment->parsed()) {
      auto cfg = qtomo::experiment_config_from_json(qtomo::read_json_file(config_file));
      if (g.seed) cfg.master_seed = *g.seed;
      if (!g.projectors.empty()) cfg.projector_file = g.projectors;
      const int n = threads >= 0 ? threads : qtomo::threads_from_env();
      const auto rep = qtomo::run_experiment(cfg, n);
      if (g.out.empty()) {
        std::cout << qtomo::report_csv(rep);
      } else {
        qtomo::emit_report(rep, g.out);
      }
    }
  } catch (const qtomo::IoError& e) {
    std::cerr << "qtomo: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "qtomo: " << e.what() << "\n";
    return kExitIo;
  } catch (const qtomo::TrialFailure& e) {
    std::cerr << "qtomo: trial with seed " << e.seed << " failed: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "qtomo: " << e.what() << "\n";
    return kExitContract;
  }
  return 0;
}
