// Copyright 2026 The doughroll Authors
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

// doughroll: collect, train, run, replay, palpate.
//
// Failures exit nonzero and print one JSON line on stderr:
//   {"error":"<kind>","message":"...","line":N}

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "doughroll/config.hpp"
#include "doughroll/control.hpp"
#include "doughroll/dynmodel.hpp"
#include "doughroll/experiment.hpp"
#include "doughroll/force_model.hpp"
#include "doughroll/sim.hpp"
#include "doughroll/stiffness.hpp"

namespace dr = doughroll;

namespace {

struct CliFailure {
  std::string kind;
  std::string message;
  std::optional<std::size_t> line;
};

[[noreturn]] void fail(std::string kind, std::string message) {
  throw CliFailure{std::move(kind), std::move(message), std::nullopt};
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("io_error", "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) fail("io_error", "cannot write " + path);
  return out;
}

dr::SimConstants load_sim(const std::string& config) {
  if (config.empty()) return {};
  return dr::SimConstants::from_config(dr::KeyValueConfig::load(config), "sim.");
}

// ---------------------------------------------------------------------------

struct CollectArgs {
  std::string material;
  std::uint64_t seed = 1;
  std::string out;
  int inits = 0;
  int steps = 0;
  std::string sim_config;
};

int cmd_collect(const CollectArgs& a) {
  const dr::SimConstants sim = load_sim(a.sim_config);
  const dr::Material mat = dr::material_by_name(a.material, sim);
  dr::CollectionProtocol p = dr::collection_protocol(a.material);
  if (a.inits > 0) p.inits = a.inits;
  if (a.steps > 0) p.steps = a.steps;
  const auto rows = dr::collect_offpolicy(mat, p.inits, p.steps, a.seed, sim);
  auto out = open_out(a.out);
  dr::write_dataset(out, rows);
  if (!out) fail("io_error", "cannot write " + a.out);
  std::cout << "collected " << rows.size() << " transitions (" << p.inits << " x " << p.steps
            << ") for material " << a.material << " -> " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  int holdout_every = 5;
  double ridge = 1e-8;
};

int cmd_train(const TrainArgs& a) {
  auto in = open_in(a.data);
  const auto rows = dr::read_dataset(in);
  const auto data = dr::transitions_of(rows);
  if (data.empty()) fail("invalid_input", "dataset has no rows");
  if (data.size() < static_cast<std::size_t>(dr::kNumFeatures)) {
    std::cerr << "warning: " << data.size() << " rows for " << dr::kNumFeatures
              << " features; the ridge term determines part of the fit\n";
  }
  if (a.holdout_every < 2) fail("invalid_argument", "--holdout-every must be at least 2");

  std::vector<dr::Transition> train, held;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (i % static_cast<std::size_t>(a.holdout_every) ==
             static_cast<std::size_t>(a.holdout_every - 1)
         ? held
         : train)
        .push_back(data[i]);
  }
  const dr::FitOptions opts{a.ridge};
  std::array<double, 3> rmse{};
  std::string which = "held-out";
  if (held.empty() || train.empty()) {
    which = "in-sample";
    rmse = dr::prediction_rmse(dr::fit(data, opts), data);
  } else {
    rmse = dr::prediction_rmse(dr::fit(train, opts), held);
  }
  const dr::TransitionModel model = dr::fit(data, opts);
  auto out = open_out(a.out);
  dr::write_model(out, model);
  if (!out) fail("io_error", "cannot write " + a.out);
  std::cout << std::setprecision(6) << "trained on " << data.size() << " rows -> " << a.out
            << '\n'
            << which << " RMSE (m): l " << rmse[0] << "  w " << rmse[1] << "  h " << rmse[2]
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string out;
  int jobs = 0;
  int trials = 0;
};

int cmd_run(const RunArgs& a) {
  dr::ExperimentSpec spec = dr::ExperimentSpec::load(a.config);
  if (!a.out.empty()) spec.out_dir = a.out;
  if (a.jobs > 0) spec.jobs = a.jobs;
  if (a.trials > 0) spec.trials = a.trials;
  const dr::ExperimentReport report = dr::run_experiment(spec);
  int faults = 0;
  std::cout << std::left << std::setw(48) << "cell" << std::right << std::setw(8) << "trials"
            << std::setw(9) << "reached" << std::setw(11) << "mean" << std::setw(10)
            << "ci95" << '\n';
  for (const auto& s : report.summary) {
    faults += s.faults;
    std::cout << std::left << std::setw(48) << s.cell.name() << std::right << std::setw(8)
              << s.trials << std::setw(9) << s.reached << std::setw(11) << std::fixed
              << std::setprecision(2) << s.mean_steps << std::setw(10) << s.ci95 << '\n'
              << std::defaultfloat;
  }
  std::cout << "summary: " << (report.dir / "summary.csv").string() << '\n';
  if (faults > 0) std::cout << faults << " trial(s) ended in a fault; see their logs\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ReplayArgs {
  std::string log;
  bool quiet = false;
};

int cmd_replay(const ReplayArgs& a) {
  auto in = open_in(a.log);
  const dr::EpisodeLog log = dr::read_log(in);
  if (!a.quiet) {
    std::printf("goal (l, w, h) = (%.4f, %.4f, %.4f) m, epsilon %.4f m\n", log.goal.length,
                log.goal.width, log.goal.height, log.epsilon);
    std::printf("%5s %8s %8s %8s %8s %8s %8s %3s\n", "step", "l", "w", "h", "ell", "delta",
                "dist", "v");
    for (const auto& r : log.records) {
      const auto& o = r.observed;
      if (r.action) {
        std::printf("%5d %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %3d\n", r.step, o.length,
                    o.width, o.height, r.action->band_length, r.action->depth, r.distance,
                    r.model_version);
      } else {
        std::printf("%5d %8.4f %8.4f %8.4f %8s %8s %8.4f %3d\n", r.step, o.length, o.width,
                    o.height, "-", "-", r.distance, r.model_version);
      }
    }
  }
  const double final_dist = log.records.empty() ? 0.0 : log.records.back().distance;
  std::printf("outcome %s after %d steps, final distance %.6f m (epsilon %.4f)\n",
              dr::to_string(log.outcome), log.steps_to_goal, final_dist, log.epsilon);
  if (!log.fault.empty()) std::printf("fault: %s\n", log.fault.c_str());
  const auto issues = dr::validate_log(log);
  if (!issues.empty()) {
    std::string msg;
    for (const auto& s : issues) msg += (msg.empty() ? "" : "; ") + s;
    fail("invariant_violation", msg);
  }
  std::printf("log invariants hold\n");
  return 0;
}

// ---------------------------------------------------------------------------

struct PalpateArgs {
  std::string material = "B";
  double stiffness = 0.0;
  std::uint64_t seed = 1;
  std::string calibration;
  std::string sim_config;
  std::string hydrated = "A";
  std::string dry = "C";
};

int cmd_palpate(const PalpateArgs& a) {
  const dr::SimConstants sim = load_sim(a.sim_config);
  dr::Material mat = a.stiffness > 0.0 ? dr::Material::make("custom", a.stiffness, 0.0, sim)
                                       : dr::material_by_name(a.material, sim);
  dr::ForceModel calibrated;
  if (a.calibration.empty()) {
    calibrated = dr::fit_force_model(dr::default_calibration());
  } else {
    auto in = open_in(a.calibration);
    calibrated = dr::fit_force_model(dr::read_calibration_csv(in));
  }
  dr::DoughSim dough(mat, sim, dr::ForceModel{}, a.seed);
  const auto est =
      dr::palpate_and_estimate(dough, calibrated, dr::default_probe_schedule(sim.band_max));
  const double sh = dr::material_by_name(a.hydrated, sim).stiffness;
  const double sd = dr::material_by_name(a.dry, sim).stiffness;
  const double beta = dr::blend_coefficient(est.sigma, sh, sd);
  std::printf("material %s (true sigma %.3f N/mm)\n", mat.name.c_str(), mat.stiffness);
  std::printf("probe ell %.4f m, depth %.4f m: force %.3f N, deflection %.3f mm\n",
              est.probe.band_length, est.probe.depth, est.force_used, est.deflection_used);
  std::printf("estimated sigma %.4f N/mm\n", est.sigma);
  std::printf("blend beta %.4f between %s (%.2f) and %s (%.2f)\n", beta, a.hydrated.c_str(),
              sh, a.dry.c_str(), sd);
  return 0;
}

void print_error(const std::string& kind, const std::string& message,
                 std::optional<std::size_t> line) {
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = message;
  if (line) j["line"] = *line;
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"doughroll: model-based dough rolling on a simulated workbench"};
  app.require_subcommand(1);

  CollectArgs ca;
  auto* collect = app.add_subcommand("collect", "Random-exploration dataset for a material");
  collect->add_option("-m,--material", ca.material, "Material preset (A, B or C)")->required();
  collect->add_option("-s,--seed", ca.seed, "Random seed");
  collect->add_option("-o,--out", ca.out, "Output dataset CSV")->required();
  collect->add_option("--inits", ca.inits, "Override the number of re-initializations");
  collect->add_option("--steps", ca.steps, "Override the steps per initialization");
  collect->add_option("--sim-config", ca.sim_config, "Config file with a [sim] section");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Fit a transition model to a dataset");
  train->add_option("-d,--data", ta.data, "Dataset CSV")->required();
  train->add_option("-o,--out", ta.out, "Output model file")->required();
  train->add_option("--holdout-every", ta.holdout_every,
                    "Hold out every k-th row for the RMSE report");
  train->add_option("--ridge", ta.ridge, "Ridge weight on equilibrated features");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("-c,--config", ra.config, "Experiment config file")->required();
  run->add_option("-o,--out", ra.out, "Override the output root directory");
  run->add_option("-j,--jobs", ra.jobs, "Parallel trials");
  run->add_option("-n,--trials", ra.trials, "Override trials per cell");

  ReplayArgs pa;
  auto* replay = app.add_subcommand("replay", "Print and validate an episode log");
  replay->add_option("log", pa.log, "Episode log CSV")->required();
  replay->add_flag("-q,--quiet", pa.quiet, "Only print the outcome and validation");

  PalpateArgs pp;
  auto* palpate = app.add_subcommand("palpate", "Estimate stiffness and the blend weight");
  palpate->add_option("-m,--material", pp.material, "Material preset (A, B or C)");
  palpate->add_option("--stiffness", pp.stiffness, "Custom true stiffness, N/mm");
  palpate->add_option("-s,--seed", pp.seed, "Random seed");
  palpate->add_option("--calibration", pp.calibration, "Force calibration CSV");
  palpate->add_option("--sim-config", pp.sim_config, "Config file with a [sim] section");
  palpate->add_option("--hydrated", pp.hydrated, "Soft reference material");
  palpate->add_option("--dry", pp.dry, "Stiff reference material");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) print_error("usage", e.what(), std::nullopt);
    return code;
  }

  try {
    if (*collect) return cmd_collect(ca);
    if (*train) return cmd_train(ta);
    if (*run) return cmd_run(ra);
    if (*replay) return cmd_replay(pa);
    if (*palpate) return cmd_palpate(pp);
  } catch (const CliFailure& f) {
    print_error(f.kind, f.message, f.line);
    return 1;
  } catch (const dr::ParseError& e) {
    print_error("parse_error", e.what(), e.line());
    return 1;
  } catch (const dr::EstimationFailedError& e) {
    print_error("estimation_failed", e.what(), std::nullopt);
    return 1;
  } catch (const dr::CalibrationError& e) {
    print_error("calibration_error", e.what(), std::nullopt);
    return 1;
  } catch (const dr::Error& e) {
    print_error("error", e.what(), std::nullopt);
    return 1;
  } catch (const std::exception& e) {
    print_error("internal_error", e.what(), std::nullopt);
    return 1;
  }
  return 1;
}
