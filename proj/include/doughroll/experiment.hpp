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

// Benchmark harness: expands an experiment config into cells and runs their
// trials. Output is one log per trial plus summary and plot tables.

#ifndef DOUGHROLL_EXPERIMENT_HPP_
#define DOUGHROLL_EXPERIMENT_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "doughroll/common.hpp"
#include "doughroll/config.hpp"
#include "doughroll/control.hpp"
#include "doughroll/dynmodel.hpp"
#include "doughroll/force_model.hpp"
#include "doughroll/sim.hpp"
#include "doughroll/stiffness.hpp"

namespace doughroll {

enum class InitMode { kCorrect, kWrong, kStiffness };

inline const char* to_string(InitMode m) {
  switch (m) {
    case InitMode::kCorrect: return "correct";
    case InitMode::kWrong: return "wrong";
    case InitMode::kStiffness: return "stiffness";
  }
  return "?";
}

inline InitMode init_mode_from_string(const std::string& s) {
  if (s == "correct") return InitMode::kCorrect;
  if (s == "wrong") return InitMode::kWrong;
  if (s == "stiffness" || s == "stiffness-blend") return InitMode::kStiffness;
  throw Error("unknown init mode '" + s + "'");
}

// Off-policy budget per material: 4 x 150 for the hydrated dough, 6 x 100
// otherwise (600 transitions either way).
struct CollectionProtocol {
  int inits = 6;
  int steps = 100;
};

inline CollectionProtocol collection_protocol(const std::string& material) {
  if (material == "A") return {4, 150};
  return {6, 100};
}

// Short decimal rendering for names and CSV cells; exact_number round-trips.
inline std::string format_number(double v, int digits = 6) {
  std::ostringstream ss;
  ss << std::setprecision(digits) << v;
  return ss.str();
}

inline std::string exact_number(double v) { return format_number(v, 17); }

struct Cell {
  std::string material;
  double goal_in = 0.0;
  Policy policy = Policy::kMpcPowell;
  InitMode init = InitMode::kCorrect;
  ModelMode mode = ModelMode::kIterative;

  double goal_m() const { return goal_in * kMetersPerInch; }

  std::string name() const {
    return material + "_" + format_number(goal_in) + "in_" + to_string(policy) + "_" +
           to_string(init) + "_" + to_string(mode);
  }
};

struct ExperimentSpec {
  std::string name = "experiment";
  std::vector<std::string> materials{"A"};
  std::vector<double> goals_in{6.0};
  // Pair goals_in[i] with materials[i] instead of taking the cross product.
  bool pair_goals = false;
  std::vector<Policy> policies{Policy::kMpcPowell};
  std::vector<InitMode> init_modes{InitMode::kCorrect};
  std::vector<ModelMode> model_modes{ModelMode::kIterative};
  int trials = 1;
  std::uint64_t seed = 1;
  std::uint64_t train_seed = 7;
  std::string out_dir = "out";
  int jobs = 1;
  // Soft and stiff reference doughs for the wrong and stiffness inits.
  std::string hydrated = "A";
  std::string dry = "C";
  std::map<std::string, std::string> model_files;
  std::map<std::string, std::string> dataset_files;
  std::string calibration_file;
  EpisodeConfig episode;
  SimConstants sim;

  void validate() const {
    if (trials < 1) throw Error("trials must be at least 1");
    if (jobs < 1) throw Error("jobs must be at least 1");
    if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
      throw Error("experiment name must be a plain directory name");
    }
    if (materials.empty() || goals_in.empty() || policies.empty() || init_modes.empty() ||
        model_modes.empty()) {
      throw Error("materials, goals, policies, init modes and model modes must be non-empty");
    }
    for (double g : goals_in) {
      if (!(g > 0.0)) throw Error("goals must be positive");
    }
    if (pair_goals && goals_in.size() != materials.size()) {
      throw Error("pair_goals needs one goal per material");
    }
    for (const auto& m : materials) material_by_name(m, sim);
    material_by_name(hydrated, sim);
    material_by_name(dry, sim);
    if (!(material_by_name(dry, sim).stiffness > material_by_name(hydrated, sim).stiffness)) {
      throw Error("the dry reference dough must be stiffer than the hydrated one");
    }
    for (const auto& files : {model_files, dataset_files}) {
      for (const auto& [mat, path] : files) {
        if (!std::filesystem::exists(path)) throw Error("missing file for " + mat + ": " + path);
      }
    }
    for (const auto& [mat, path] : model_files) {
      if (!dataset_files.contains(mat)) {
        throw Error("model file for " + mat + " needs its dataset for refits");
      }
    }
    if (!calibration_file.empty() && !std::filesystem::exists(calibration_file)) {
      throw Error("missing calibration file: " + calibration_file);
    }
    episode.validate();
  }

  std::vector<Cell> cells() const {
    std::vector<Cell> out;
    for (std::size_t mi = 0; mi < materials.size(); ++mi) {
      std::vector<double> goals = goals_in;
      if (pair_goals) goals = {goals_in[mi]};
      for (double g : goals) {
        for (Policy p : policies) {
          for (InitMode init : init_modes) {
            for (ModelMode mode : model_modes) {
              out.push_back({materials[mi], g, p, init, mode});
            }
          }
        }
      }
    }
    std::sort(out.begin(), out.end(),
              [](const Cell& a, const Cell& b) { return a.name() < b.name(); });
    return out;
  }

  // Relative paths in the config resolve against base_dir.
  static ExperimentSpec from_config(const KeyValueConfig& cfg,
                                    const std::filesystem::path& base_dir = {}) {
    ExperimentSpec s;
    auto path_of = [&](const std::string& p) {
      std::filesystem::path q(p);
      return (q.is_relative() && !base_dir.empty() ? base_dir / q : q).string();
    };
    s.name = cfg.string_or("experiment.name", s.name);
    if (cfg.has("experiment.materials")) s.materials = cfg.strings("experiment.materials");
    if (cfg.has("experiment.goals_in") && cfg.has("experiment.goals_m")) {
      throw Error("give goals in inches or meters, not both");
    }
    if (cfg.has("experiment.goals_in")) s.goals_in = cfg.numbers("experiment.goals_in");
    if (cfg.has("experiment.goals_m")) {
      s.goals_in.clear();
      for (double g : cfg.numbers("experiment.goals_m")) s.goals_in.push_back(g / kMetersPerInch);
    }
    s.pair_goals = cfg.number_or("experiment.pair_goals", 0.0) != 0.0;
    if (cfg.has("experiment.policies")) {
      s.policies.clear();
      for (const auto& p : cfg.strings("experiment.policies")) {
        s.policies.push_back(policy_from_string(p));
      }
    }
    if (cfg.has("experiment.init")) {
      s.init_modes.clear();
      for (const auto& m : cfg.strings("experiment.init")) {
        s.init_modes.push_back(init_mode_from_string(m));
      }
    }
    if (cfg.has("experiment.model_mode")) {
      s.model_modes.clear();
      for (const auto& m : cfg.strings("experiment.model_mode")) {
        s.model_modes.push_back(model_mode_from_string(m));
      }
    }
    s.trials = static_cast<int>(cfg.number_or("experiment.trials", s.trials));
    s.seed = static_cast<std::uint64_t>(cfg.number_or("experiment.seed", 1.0));
    s.train_seed = static_cast<std::uint64_t>(cfg.number_or("experiment.train_seed", 7.0));
    s.out_dir = cfg.string_or("experiment.out", s.out_dir);
    s.jobs = static_cast<int>(cfg.number_or("experiment.jobs", s.jobs));
    s.hydrated = cfg.string_or("stiffness.hydrated", s.hydrated);
    s.dry = cfg.string_or("stiffness.dry", s.dry);
    if (cfg.has("stiffness.calibration")) {
      s.calibration_file = path_of(*cfg.string("stiffness.calibration"));
    }
    for (const auto& key : cfg.keys()) {
      if (key.rfind("models.", 0) == 0) {
        s.model_files[key.substr(7)] = path_of(*cfg.string(key));
      } else if (key.rfind("datasets.", 0) == 0) {
        s.dataset_files[key.substr(9)] = path_of(*cfg.string(key));
      }
    }
    s.sim = SimConstants::from_config(cfg, "sim.");
    s.episode.plan = PlanConfig::from_config(cfg, "planning.");
    s.episode.epsilon = cfg.number_or("episode.epsilon", s.episode.epsilon);
    s.episode.max_steps =
        static_cast<int>(cfg.number_or("episode.max_steps", s.episode.max_steps));
    s.episode.refit_period =
        static_cast<int>(cfg.number_or("episode.refit_period", s.episode.refit_period));
    s.episode.on_policy_weight =
        cfg.number_or("episode.on_policy_weight", s.episode.on_policy_weight);
    s.validate();
    return s;
  }

  static ExperimentSpec load(const std::string& path) {
    return from_config(KeyValueConfig::load(path),
                       std::filesystem::path(path).parent_path());
  }
};

// Off-policy data and the model fitted to it, for one material.
struct TrainedModel {
  std::vector<DatasetRow> rows;
  std::vector<Transition> data;
  TransitionModel model;
};

inline TrainedModel train_material(const std::string& material, std::uint64_t seed,
                                   const SimConstants& sim) {
  const CollectionProtocol p = collection_protocol(material);
  TrainedModel t;
  t.rows = collect_offpolicy(material_by_name(material, sim), p.inits, p.steps, seed, sim);
  t.data = transitions_of(t.rows);
  t.model = fit(t.data);
  return t;
}

inline std::uint64_t material_seed(std::uint64_t train_seed, const std::string& material) {
  std::uint64_t h = train_seed;
  for (unsigned char c : material) h = mix_seed(h, c);
  return h;
}

// Models keyed by material, loaded from disk or trained from train_seed.
class ModelBank {
 public:
  const TrainedModel& get(const std::string& material) const {
    const auto it = models_.find(material);
    if (it == models_.end()) throw Error("no model for material " + material);
    return it->second;
  }

  void add(const std::string& material, TrainedModel m) { models_[material] = std::move(m); }

  static ModelBank build(const ExperimentSpec& spec) {
    std::set<std::string> needed;
    for (const auto& c : spec.cells()) {
      if (!is_mpc(c.policy)) continue;
      switch (c.init) {
        case InitMode::kCorrect: needed.insert(c.material); break;
        case InitMode::kWrong:
        case InitMode::kStiffness:
          needed.insert(spec.hydrated);
          needed.insert(spec.dry);
          break;
      }
    }
    ModelBank bank;
    for (const auto& mat : needed) {
      if (spec.dataset_files.contains(mat)) {
        TrainedModel t;
        std::ifstream din(spec.dataset_files.at(mat));
        t.rows = read_dataset(din);
        t.data = transitions_of(t.rows);
        if (spec.model_files.contains(mat)) {
          std::ifstream min(spec.model_files.at(mat));
          t.model = read_model(min);
        } else {
          t.model = fit(t.data);
        }
        bank.add(mat, std::move(t));
      } else {
        bank.add(mat, train_material(mat, material_seed(spec.train_seed, mat), spec.sim));
      }
    }
    return bank;
  }

 private:
  std::map<std::string, TrainedModel> models_;
};

struct TrialResult {
  Cell cell;
  int trial = 0;
  EpisodeLog log;
  std::string init_model;  // material whose model seeded the planner, or "blend"
  std::optional<double> beta;
  std::optional<double> sigma;
};

inline std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  return mix_seed(seed, static_cast<std::uint64_t>(trial));
}

// Wrong-model partner: the reference doughs swap, any other material gets
// the hydrated model on even trials and the dry one on odd trials.
inline std::string wrong_model_for(const ExperimentSpec& spec, const std::string& material,
                                   int trial) {
  if (material == spec.hydrated) return spec.dry;
  if (material == spec.dry) return spec.hydrated;
  return trial % 2 == 0 ? spec.hydrated : spec.dry;
}

inline ForceModel calibrated_force_model(const ExperimentSpec& spec) {
  if (spec.calibration_file.empty()) return fit_force_model(default_calibration());
  std::ifstream in(spec.calibration_file);
  return fit_force_model(read_calibration_csv(in));
}

// One trial. The dough and its random stream depend only on the trial index,
// so every policy and init mode faces the same initial doughs.
inline TrialResult run_trial(const ExperimentSpec& spec, const ModelBank& bank,
                             const ForceModel& calibrated, const Cell& cell, int trial) {
  TrialResult r;
  r.cell = cell;
  r.trial = trial;
  const std::uint64_t seed = trial_seed(spec.seed, trial);
  const Material material = material_by_name(cell.material, spec.sim);
  DoughSim sim(material, spec.sim, ForceModel{}, seed);

  EpisodeConfig ec = spec.episode;
  ec.policy = cell.policy;
  ec.goal_length = cell.goal_m();
  ec.model_mode = cell.mode;
  ec.seed = mix_seed(seed, 5);

  std::optional<Dynamics> model;
  std::vector<Transition> d_off;
  if (is_mpc(cell.policy)) {
    switch (cell.init) {
      case InitMode::kCorrect:
      case InitMode::kWrong: {
        r.init_model = cell.init == InitMode::kCorrect
                           ? cell.material
                           : wrong_model_for(spec, cell.material, trial);
        const TrainedModel& t = bank.get(r.init_model);
        model = Dynamics{t.model};
        d_off = t.data;
        break;
      }
      case InitMode::kStiffness: {
        // Palpation leaves the dough unchanged; a separate stream keeps the
        // rolling trajectory comparable with the other init modes.
        DoughSim probe(material, spec.sim, ForceModel{}, mix_seed(seed, 9));
        const StiffnessEstimate est =
            palpate_and_estimate(probe, calibrated, default_probe_schedule(spec.sim.band_max));
        const double beta =
            blend_coefficient(est.sigma, material_by_name(spec.hydrated, spec.sim).stiffness,
                              material_by_name(spec.dry, spec.sim).stiffness);
        r.sigma = est.sigma;
        r.beta = beta;
        r.init_model = "blend";
        const TrainedModel& h = bank.get(spec.hydrated);
        const TrainedModel& d = bank.get(spec.dry);
        model = Dynamics{BlendedModel{h.model, d.model, beta}};
        // Refits start from the two datasets weighted like the blend.
        for (auto t : h.data) {
          t.weight *= 1.0 - beta;
          if (t.weight > 0.0) d_off.push_back(t);
        }
        for (auto t : d.data) {
          t.weight *= beta;
          if (t.weight > 0.0) d_off.push_back(t);
        }
        break;
      }
    }
  }

  r.log = run_episode(sim, model, d_off, ec).log;
  auto& x = r.log.extra;
  x.emplace_back("experiment", spec.name);
  x.emplace_back("cell", cell.name());
  x.emplace_back("material", cell.material);
  x.emplace_back("goal_in", exact_number(cell.goal_in));
  x.emplace_back("policy", to_string(cell.policy));
  x.emplace_back("init", to_string(cell.init));
  x.emplace_back("model_mode", to_string(cell.mode));
  x.emplace_back("trial", std::to_string(trial));
  if (!r.init_model.empty()) x.emplace_back("init_model", r.init_model);
  if (r.sigma) x.emplace_back("sigma", exact_number(*r.sigma));
  if (r.beta) x.emplace_back("beta", exact_number(*r.beta));
  return r;
}

struct CellSummary {
  Cell cell;
  int trials = 0;
  int reached = 0;
  int faults = 0;
  double mean_steps = 0.0;
  double std_steps = 0.0;
  double ci95 = 0.0;  // half-width of the t-interval on the mean
};

// Mean, sample standard deviation and 95% Student-t half-width.
inline void describe(std::span<const double> xs, double& mean, double& sd, double& ci95) {
  const auto n = static_cast<double>(xs.size());
  mean = sd = ci95 = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= n;
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  ci95 = boost::math::quantile(boost::math::complement(dist, 0.025)) * sd / std::sqrt(n);
}

inline CellSummary summarize_cell(const Cell& cell, std::span<const EpisodeLog> logs) {
  CellSummary s;
  s.cell = cell;
  s.trials = static_cast<int>(logs.size());
  std::vector<double> steps;
  for (const auto& l : logs) {
    if (l.outcome == Outcome::kReached) ++s.reached;
    if (l.outcome == Outcome::kFault) ++s.faults;
    steps.push_back(static_cast<double>(l.steps_to_goal));
  }
  describe(steps, s.mean_steps, s.std_steps, s.ci95);
  return s;
}

inline constexpr const char* kSummaryHeader =
    "cell,material,goal_in,goal_m,policy,init,model_mode,trials,reached,faults,"
    "mean_steps,std_steps,ci95_half,ci95_low,ci95_high";

inline void write_summary(std::ostream& out, std::span<const CellSummary> rows) {
  out << kSummaryHeader << '\n' << std::setprecision(10);
  for (const auto& s : rows) {
    const Cell& c = s.cell;
    out << c.name() << ',' << c.material << ',' << format_number(c.goal_in) << ','
        << c.goal_m() << ',' << to_string(c.policy) << ',' << to_string(c.init) << ','
        << to_string(c.mode) << ',' << s.trials << ',' << s.reached << ',' << s.faults << ','
        << s.mean_steps << ',' << s.std_steps << ',' << s.ci95 << ','
        << s.mean_steps - s.ci95 << ',' << s.mean_steps + s.ci95 << '\n';
  }
}

// Long-format bar data: one row per (goal, material, series), the series
// naming the policy and, when they vary, the init and model modes.
inline void write_plot_data(std::ostream& out, std::span<const CellSummary> rows) {
  std::set<std::string> inits, modes;
  for (const auto& s : rows) {
    inits.insert(to_string(s.cell.init));
    modes.insert(to_string(s.cell.mode));
  }
  struct Bar {
    double goal;
    std::string material, series;
    double mean, ci;
  };
  std::vector<Bar> bars;
  for (const auto& s : rows) {
    std::string series = to_string(s.cell.policy);
    if (inits.size() > 1) series += std::string("/") + to_string(s.cell.init);
    if (modes.size() > 1) series += std::string("/") + to_string(s.cell.mode);
    bars.push_back({s.cell.goal_in, s.cell.material, series, s.mean_steps, s.ci95});
  }
  std::stable_sort(bars.begin(), bars.end(), [](const Bar& a, const Bar& b) {
    if (a.goal != b.goal) return a.goal < b.goal;
    if (a.material != b.material) return a.material < b.material;
    return a.series < b.series;
  });
  out << "goal_in,material,series,mean_steps,ci95_half\n" << std::setprecision(10);
  for (const auto& b : bars) {
    out << format_number(b.goal) << ',' << b.material << ',' << b.series << ',' << b.mean
        << ',' << b.ci << '\n';
  }
}

inline std::string trial_file_name(int trial) {
  std::ostringstream ss;
  ss << "trial_" << std::setw(3) << std::setfill('0') << trial << ".csv";
  return ss.str();
}

struct ExperimentReport {
  std::filesystem::path dir;
  std::vector<CellSummary> summary;
  std::vector<TrialResult> trials;
};

// Runs every cell and writes out/<name>/<cell>/trial_NNN.csv, summary.csv
// and plot.csv. Trial faults are logged and counted; the run continues.
inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<Cell> cells = spec.cells();
  const ModelBank bank = ModelBank::build(spec);
  const bool needs_force = std::any_of(cells.begin(), cells.end(), [](const Cell& c) {
    return is_mpc(c.policy) && c.init == InitMode::kStiffness;
  });
  const ForceModel calibrated = needs_force ? calibrated_force_model(spec) : ForceModel{};

  ExperimentReport report;
  report.dir = std::filesystem::path(spec.out_dir) / spec.name;
  std::filesystem::create_directories(report.dir);

  const std::size_t total = cells.size() * static_cast<std::size_t>(spec.trials);
  report.trials.resize(total);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::optional<std::string> first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const Cell& cell = cells[i / static_cast<std::size_t>(spec.trials)];
      const int trial = static_cast<int>(i % static_cast<std::size_t>(spec.trials));
      TrialResult r;
      try {
        r = run_trial(spec, bank, calibrated, cell, trial);
      } catch (const Error& e) {
        r.cell = cell;
        r.trial = trial;
        r.log.outcome = Outcome::kFault;
        r.log.fault = e.what();
        r.log.max_steps = spec.episode.max_steps;
        r.log.steps_to_goal = spec.episode.max_steps;
        r.log.extra = {{"experiment", spec.name}, {"cell", cell.name()},
                       {"material", cell.material}, {"goal_in", exact_number(cell.goal_in)},
                       {"policy", to_string(cell.policy)}, {"init", to_string(cell.init)},
                       {"model_mode", to_string(cell.mode)}, {"trial", std::to_string(trial)}};
      }
      try {
        const auto dir = report.dir / cell.name();
        std::filesystem::create_directories(dir);
        std::ofstream out(dir / trial_file_name(trial));
        write_log(out, r.log);
        if (!out) throw Error("cannot write log for " + cell.name());
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = e.what();
      }
      report.trials[i] = std::move(r);
    }
  };
  const int n_threads = std::min<int>(spec.jobs, static_cast<int>(std::max<std::size_t>(total, 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) throw Error(*first_error);

  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<EpisodeLog> logs;
    for (int t = 0; t < spec.trials; ++t) {
      logs.push_back(report.trials[c * static_cast<std::size_t>(spec.trials) +
                                   static_cast<std::size_t>(t)].log);
    }
    report.summary.push_back(summarize_cell(cells[c], logs));
  }
  {
    std::ofstream out(report.dir / "summary.csv");
    write_summary(out, report.summary);
    if (!out) throw Error("cannot write summary.csv");
  }
  {
    std::ofstream out(report.dir / "plot.csv");
    write_plot_data(out, report.summary);
    if (!out) throw Error("cannot write plot.csv");
  }
  return report;
}

// Rebuilds the summary rows from the trial logs under an experiment directory.
inline std::vector<CellSummary> summarize_logs(const std::filesystem::path& dir) {
  std::map<std::string, std::pair<Cell, std::map<int, EpisodeLog>>> by_cell;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    for (const auto& f : std::filesystem::directory_iterator(entry.path())) {
      if (f.path().extension() != ".csv") continue;
      std::ifstream in(f.path());
      EpisodeLog log = read_log(in);
      auto need = [&](const char* key) {
        auto v = log.find_extra(key);
        if (!v) throw Error(f.path().string() + ": missing metadata '" + key + "'");
        return *v;
      };
      Cell c;
      c.material = need("material");
      c.goal_in = std::stod(need("goal_in"));
      c.policy = policy_from_string(need("policy"));
      c.init = init_mode_from_string(need("init"));
      c.mode = model_mode_from_string(need("model_mode"));
      const int trial = std::stoi(need("trial"));
      auto& slot = by_cell[c.name()];
      slot.first = c;
      slot.second[trial] = std::move(log);
    }
  }
  std::vector<CellSummary> out;
  for (auto& [name, slot] : by_cell) {
    std::vector<EpisodeLog> logs;
    for (auto& [t, l] : slot.second) logs.push_back(std::move(l));
    out.push_back(summarize_cell(slot.first, logs));
  }
  return out;
}

}  // namespace doughroll

#endif  // DOUGHROLL_EXPERIMENT_HPP_
