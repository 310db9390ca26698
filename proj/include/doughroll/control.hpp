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

// Episode orchestration. Each step observes the dough and rolls unless the
// goal is met. Iterative mode refits the model every T steps from the
// on-policy transitions gathered so far.

#ifndef DOUGHROLL_CONTROL_HPP_
#define DOUGHROLL_CONTROL_HPP_

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "doughroll/common.hpp"
#include "doughroll/dynmodel.hpp"
#include "doughroll/geometry.hpp"
#include "doughroll/planning.hpp"
#include "doughroll/sim.hpp"

namespace doughroll {

enum class Policy { kRandom, kHeuristic, kMpcCem, kMpcPowell };
enum class ModelMode { kFixed, kIterative };
enum class Outcome { kReached, kMaxSteps, kFault };

inline const char* to_string(Policy p) {
  switch (p) {
    case Policy::kRandom: return "random";
    case Policy::kHeuristic: return "heuristic";
    case Policy::kMpcCem: return "mpc_cem";
    case Policy::kMpcPowell: return "mpc_powell";
  }
  return "?";
}

inline Policy policy_from_string(const std::string& s) {
  if (s == "random") return Policy::kRandom;
  if (s == "heuristic") return Policy::kHeuristic;
  if (s == "mpc_cem") return Policy::kMpcCem;
  if (s == "mpc_powell") return Policy::kMpcPowell;
  throw Error("unknown policy '" + s + "'");
}

inline const char* to_string(ModelMode m) {
  return m == ModelMode::kFixed ? "fixed" : "iterative";
}

inline ModelMode model_mode_from_string(const std::string& s) {
  if (s == "fixed") return ModelMode::kFixed;
  if (s == "iterative") return ModelMode::kIterative;
  throw Error("unknown model mode '" + s + "'");
}

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::kReached: return "reached";
    case Outcome::kMaxSteps: return "max_steps";
    case Outcome::kFault: return "fault";
  }
  return "?";
}

inline Outcome outcome_from_string(const std::string& s) {
  if (s == "reached") return Outcome::kReached;
  if (s == "max_steps") return Outcome::kMaxSteps;
  if (s == "fault") return Outcome::kFault;
  throw Error("unknown outcome '" + s + "'");
}

inline bool is_mpc(Policy p) { return p == Policy::kMpcCem || p == Policy::kMpcPowell; }

struct EpisodeConfig {
  Policy policy = Policy::kRandom;
  double goal_length = 6 * kMetersPerInch;
  double epsilon = 0.01;
  int max_steps = 200;
  int refit_period = 10;
  ModelMode model_mode = ModelMode::kIterative;
  std::uint64_t seed = 0;
  double on_policy_weight = 10.0;
  PlanConfig plan;

  void validate() const {
    if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
    if (max_steps < 1) throw Error("max_steps must be at least 1");
    if (refit_period < 1) throw Error("refit period must be at least 1");
    if (!(goal_length > 0.0)) throw Error("goal length must be positive");
    plan.validate();
  }
};

inline bool goal_reached(const Shape& s, const Shape& goal, double epsilon) {
  return distance(s, goal) < epsilon;
}

// l ~ U[w, band_max], depth ~ U[0.005, h]. A dough wider than the maximum
// throw gets band_max and sets *wide.
inline RollAction random_action(const DoughState& s, double band_max, Rng& rng,
                                bool* wide = nullptr) {
  const ActionBounds b = ActionBounds::for_shape(s.shape(), band_max);
  if (wide != nullptr) *wide = s.width > band_max;
  std::uniform_real_distribution<double> ub(b.band_min, b.band_max);
  std::uniform_real_distribution<double> ud(b.depth_min, b.depth_max);
  RollAction a;
  a.band_length = b.band_min < b.band_max ? ub(rng) : b.band_max;
  a.depth = b.depth_min < b.depth_max ? ud(rng) : b.depth_min;
  return a;
}

// Fixed high-force roll: 4/5 of the maximum throw, pressed to half the goal
// height below the current top.
inline RollAction heuristic_action(const DoughState& s, double band_max, double goal_height) {
  const ActionBounds b = ActionBounds::for_shape(s.shape(), band_max);
  return b.clamp({0.8 * band_max, s.height - 0.5 * goal_height});
}

struct StepRecord {
  int step = 0;
  DoughState observed;
  std::optional<RollAction> action;  // empty on the terminal observation
  double reward = 0.0;
  double distance = 0.0;
  int model_version = 0;
};

struct EpisodeLog {
  Shape goal;
  double epsilon = 0.01;
  double band_max = 0.12;
  int max_steps = 0;
  Outcome outcome = Outcome::kMaxSteps;
  // Actions executed before the goal test succeeded; max_steps otherwise.
  int steps_to_goal = 0;
  std::string fault;
  // Free-form metadata carried through the log file (key has no spaces).
  std::vector<std::pair<std::string, std::string>> extra;
  std::vector<StepRecord> records;

  std::optional<std::string> find_extra(const std::string& key) const {
    for (const auto& [k, v] : extra) {
      if (k == key) return v;
    }
    return std::nullopt;
  }
};

struct EpisodeResult {
  EpisodeLog log;
  std::optional<Dynamics> model;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Runs one episode on `sim`. MPC policies need `model`; in iterative mode the
// model is refit from d_off plus the on-policy transitions every refit_period
// steps.
inline EpisodeResult run_episode(DoughSim& sim, std::optional<Dynamics> model,
                                 std::span<const Transition> d_off,
                                 const EpisodeConfig& cfg) {
  cfg.validate();
  if (is_mpc(cfg.policy) && !model) throw Error("MPC policies require a dynamics model");

  Rng rng(mix_seed(cfg.seed, 1));
  EpisodeResult result;
  EpisodeLog& log = result.log;
  log.goal = goal_for_dough(sim.dough().volume, cfg.goal_length);
  log.epsilon = cfg.epsilon;
  log.band_max = cfg.plan.band_max;
  log.max_steps = cfg.max_steps;
  log.steps_to_goal = cfg.max_steps;

  std::vector<Transition> d_on;
  int version = 0;
  std::optional<ActionSequence> warm;
  std::optional<DoughState> prev;
  std::optional<RollAction> prev_action;

  for (int t = 0;; ++t) {
    DoughState obs;
    try {
      obs = featurize(sim.observe(), 0.0);
    } catch (const NoDoughError& e) {
      log.outcome = Outcome::kFault;
      log.fault = e.what();
      break;
    }
    if (prev) {
      d_on.push_back({prev->shape(), *prev_action, obs.shape(), cfg.on_policy_weight});
      if (cfg.model_mode == ModelMode::kIterative && model && t % cfg.refit_period == 0) {
        model = refit_with_onpolicy(d_off, d_on, cfg.on_policy_weight);
        ++version;
      }
    }

    StepRecord rec;
    rec.step = t;
    rec.observed = obs;
    rec.distance = distance(obs.shape(), log.goal);
    rec.reward = -rec.distance;
    rec.model_version = version;

    if (goal_reached(obs.shape(), log.goal, cfg.epsilon)) {
      log.outcome = Outcome::kReached;
      log.steps_to_goal = t;
      log.records.push_back(rec);
      break;
    }
    if (t >= cfg.max_steps) {
      log.outcome = Outcome::kMaxSteps;
      log.records.push_back(rec);
      break;
    }

    RollAction a;
    switch (cfg.policy) {
      case Policy::kRandom:
        a = random_action(obs, cfg.plan.band_max, rng);
        break;
      case Policy::kHeuristic:
        a = heuristic_action(obs, cfg.plan.band_max, log.goal.height);
        break;
      case Policy::kMpcCem:
        a = plan_cem(*model, obs.shape(), log.goal, cfg.plan, rng).front();
        break;
      case Policy::kMpcPowell: {
        const PowellPlan plan = plan_powell(*model, obs.shape(), log.goal, cfg.plan, warm);
        a = plan.actions.front();
        ActionSequence shifted(plan.actions.begin() + 1, plan.actions.end());
        shifted.push_back(plan.actions.back());
        warm = std::move(shifted);
        break;
      }
    }
    a = plan_bounds(obs.shape(), cfg.plan).clamp(a);
    rec.action = a;
    log.records.push_back(rec);

    sim.roll(a, Point2{obs.x_high, obs.y_high});
    prev = obs;
    prev_action = a;
  }
  result.model = std::move(model);
  return result;
}

// Random exploration from n_inits fresh doughs, steps_per_init rolls each.
inline std::vector<DatasetRow> collect_offpolicy(const Material& material, int n_inits,
                                                 int steps_per_init, std::uint64_t seed,
                                                 const SimConstants& constants = {},
                                                 const ForceModel& force = {}) {
  std::vector<DatasetRow> rows;
  DoughSim sim(material, constants, force, mix_seed(seed, 2));
  Rng rng(mix_seed(seed, 3));
  for (int i = 0; i < n_inits; ++i) {
    if (steps_per_init <= 0) continue;
    sim.reset();
    DoughState obs = featurize(sim.observe(), 0.0);
    for (int k = 0; k < steps_per_init; ++k) {
      const RollAction a = random_action(obs, constants.band_max, rng);
      sim.roll(a, Point2{obs.x_high, obs.y_high});
      const DoughState next = featurize(sim.observe(), 0.0);
      rows.push_back({i, k, {obs.shape(), a, next.shape(), 1.0}});
      obs = next;
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Log persistence: '#'-prefixed metadata, then one CSV row per observation.
// The terminal row leaves ell and delta empty.

inline constexpr const char* kLogHeader =
    "step,l,w,h,x_h,y_h,ell,delta,reward,dist,model_version";

inline void write_log(std::ostream& out, const EpisodeLog& log) {
  out << std::setprecision(17);
  out << "# doughroll-episode-log 1\n";
  out << "# goal " << log.goal.length << ' ' << log.goal.width << ' ' << log.goal.height
      << '\n';
  out << "# epsilon " << log.epsilon << '\n';
  out << "# ell_max " << log.band_max << '\n';
  out << "# max_steps " << log.max_steps << '\n';
  out << "# outcome " << to_string(log.outcome) << '\n';
  out << "# steps_to_goal " << log.steps_to_goal << '\n';
  if (!log.fault.empty()) out << "# fault " << log.fault << '\n';
  for (const auto& [k, v] : log.extra) out << "# " << k << ' ' << v << '\n';
  out << kLogHeader << '\n';
  for (const auto& r : log.records) {
    const auto& o = r.observed;
    out << r.step << ',' << o.length << ',' << o.width << ',' << o.height << ','
        << o.x_high << ',' << o.y_high << ',';
    if (r.action) out << r.action->band_length << ',' << r.action->depth;
    else out << ',';
    out << ',' << r.reward << ',' << r.distance << ',' << r.model_version << '\n';
  }
}

inline EpisodeLog read_log(std::istream& in) {
  EpisodeLog log;
  std::string line;
  std::size_t lineno = 0;
  bool header = false, magic = false;
  bool have_goal = false, have_outcome = false, have_steps = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key;
      ss >> key;
      bool ok = true;
      if (key == "doughroll-episode-log") {
        int v = 0;
        ok = static_cast<bool>(ss >> v) && v == 1;
        magic = ok;
      } else if (key == "goal") {
        ok = static_cast<bool>(ss >> log.goal.length >> log.goal.width >> log.goal.height);
        have_goal = ok;
      } else if (key == "epsilon") {
        ok = static_cast<bool>(ss >> log.epsilon);
      } else if (key == "ell_max") {
        ok = static_cast<bool>(ss >> log.band_max);
      } else if (key == "max_steps") {
        ok = static_cast<bool>(ss >> log.max_steps);
      } else if (key == "outcome") {
        std::string o;
        ok = static_cast<bool>(ss >> o);
        if (ok) {
          try {
            log.outcome = outcome_from_string(o);
          } catch (const Error&) {
            ok = false;
          }
        }
        have_outcome = ok;
      } else if (key == "steps_to_goal") {
        ok = static_cast<bool>(ss >> log.steps_to_goal);
        have_steps = ok;
      } else {
        std::string rest;
        std::getline(ss, rest);
        if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
        if (key == "fault") log.fault = rest;
        else if (!key.empty()) log.extra.emplace_back(key, rest);
      }
      if (!ok) throw ParseError(lineno, "malformed metadata line '" + key + "'");
      continue;
    }
    if (!header) {
      if (line != kLogHeader) throw ParseError(lineno, "unexpected log header");
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() == 10) cells.emplace_back();
    if (cells.size() != 11) throw ParseError(lineno, "expected 11 columns");
    auto num = [&](std::size_t i) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[i], &used);
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad number in column " + std::to_string(i + 1));
      }
      if (used != cells[i].size()) {
        throw ParseError(lineno, "bad number in column " + std::to_string(i + 1));
      }
      return v;
    };
    StepRecord r;
    r.step = static_cast<int>(num(0));
    r.observed = {num(1), num(2), num(3), num(4), num(5)};
    if (cells[6].empty() != cells[7].empty()) {
      throw ParseError(lineno, "action must have both ell and delta or neither");
    }
    if (!cells[6].empty()) r.action = RollAction{num(6), num(7)};
    r.reward = num(8);
    r.distance = num(9);
    r.model_version = static_cast<int>(num(10));
    log.records.push_back(r);
  }
  // Errors about absent content point one past the last line read.
  if (!magic) throw ParseError(lineno + 1, "missing episode log signature");
  if (!have_goal || !have_outcome || !have_steps) {
    throw ParseError(lineno + 1, "missing required metadata (goal, outcome, steps_to_goal)");
  }
  if (!header) throw ParseError(lineno + 1, "missing log header");
  if (log.outcome != Outcome::kFault && log.steps_to_goal >= 0 &&
      log.records.size() < static_cast<std::size_t>(log.steps_to_goal) + 1) {
    throw ParseError(lineno + 1, "log truncated: expected rows through step " +
                                     std::to_string(log.steps_to_goal));
  }
  return log;
}

// Checks a parsed log; returns the violated invariants (empty when valid).
inline std::vector<std::string> validate_log(const EpisodeLog& log) {
  std::vector<std::string> issues;
  if (log.records.empty()) {
    if (log.outcome != Outcome::kFault) issues.push_back("log has no records");
    return issues;
  }
  if (log.steps_to_goal > log.max_steps) issues.push_back("steps_to_goal exceeds max_steps");
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    const std::string at = "step " + std::to_string(r.step) + ": ";
    if (r.step != static_cast<int>(i)) issues.push_back(at + "steps are not consecutive");
    const double d = distance(r.observed.shape(), log.goal);
    if (std::abs(d - r.distance) > 1e-9) issues.push_back(at + "distance does not match goal");
    if (std::abs(r.reward + r.distance) > 1e-9) issues.push_back(at + "reward != -distance");
    if (i > 0 && r.model_version < log.records[i - 1].model_version) {
      issues.push_back(at + "model version decreased");
    }
    const bool last = i + 1 == log.records.size();
    if (!last && !r.action) issues.push_back(at + "missing action");
    if (r.action) {
      ActionBounds b = ActionBounds::for_shape(r.observed.shape(), log.band_max);
      if (!b.contains(*r.action, 1e-12)) issues.push_back(at + "action outside admissible bounds");
    }
  }
  const auto& last = log.records.back();
  if (log.outcome == Outcome::kReached) {
    if (!(last.distance < log.epsilon)) issues.push_back("reached log ends outside epsilon");
    if (log.steps_to_goal != last.step) issues.push_back("steps_to_goal != final step");
    if (last.action) issues.push_back("reached log ends with an action");
  } else if (log.outcome == Outcome::kMaxSteps) {
    if (log.steps_to_goal != log.max_steps) issues.push_back("steps_to_goal != max_steps");
    if (last.step != log.max_steps) issues.push_back("max_steps log is truncated");
  }
  return issues;
}

}  // namespace doughroll

#endif  // DOUGHROLL_CONTROL_HPP_
