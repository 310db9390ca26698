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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "doughroll/experiment.hpp"

namespace dr = doughroll;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("doughroll_test_experiment_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

dr::ExperimentSpec parse_spec(const std::string& text, const fs::path& base = {}) {
  std::istringstream in(text);
  return dr::ExperimentSpec::from_config(dr::KeyValueConfig::parse(in), base);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small but complete: two materials, every init mode, short episodes.
dr::ExperimentSpec small_spec(const fs::path& out) {
  auto s = parse_spec(
      "[experiment]\n"
      "name = small\n"
      "materials = [A, B]\n"
      "goals_in = [3]\n"
      "policies = [mpc_powell, heuristic]\n"
      "init = [correct, wrong, stiffness]\n"
      "model_mode = [iterative]\n"
      "trials = 3\n"
      "jobs = 2\n"
      "[episode]\n"
      "max_steps = 25\n"
      "refit_period = 5\n"
      "[planning]\n"
      "horizon = 3\n");
  s.out_dir = out.string();
  return s;
}

}  // namespace

TEST(InitMode, Strings) {
  EXPECT_EQ(dr::init_mode_from_string("stiffness-blend"), dr::InitMode::kStiffness);
  EXPECT_EQ(dr::init_mode_from_string("wrong"), dr::InitMode::kWrong);
  EXPECT_STREQ(dr::to_string(dr::InitMode::kCorrect), "correct");
  EXPECT_THROW(dr::init_mode_from_string("blend"), dr::Error);
}

TEST(Protocol, CollectionBudget) {
  EXPECT_EQ(dr::collection_protocol("A").inits, 4);
  EXPECT_EQ(dr::collection_protocol("A").steps, 150);
  EXPECT_EQ(dr::collection_protocol("C").inits, 6);
  EXPECT_EQ(dr::collection_protocol("C").steps, 100);
}

TEST(Cell, NamesAreStable) {
  const dr::Cell c{"B", 5.0, dr::Policy::kMpcCem, dr::InitMode::kStiffness,
                   dr::ModelMode::kFixed};
  EXPECT_EQ(c.name(), "B_5in_mpc_cem_stiffness_fixed");
  EXPECT_DOUBLE_EQ(c.goal_m(), 0.127);
  EXPECT_EQ(dr::trial_file_name(7), "trial_007.csv");
  EXPECT_EQ(dr::format_number(2.5), "2.5");
  EXPECT_EQ(std::stod(dr::exact_number(0.1 / 3)), 0.1 / 3);
}

TEST(Spec, CrossProductAndPairedGoals) {
  const auto s = parse_spec(
      "[experiment]\nmaterials = [A, C]\ngoals_in = [2, 4]\npolicies = [random, heuristic]\n");
  EXPECT_EQ(s.cells().size(), 8u);
  const auto p = parse_spec(
      "[experiment]\nmaterials = [A, C]\ngoals_in = [6, 4]\npair_goals = 1\n"
      "init = [wrong]\nmodel_mode = [fixed, iterative]\n");
  const auto cells = p.cells();
  ASSERT_EQ(cells.size(), 4u);
  for (const auto& c : cells) EXPECT_EQ(c.goal_in, c.material == "A" ? 6.0 : 4.0);
  EXPECT_TRUE(std::is_sorted(cells.begin(), cells.end(),
                             [](const auto& a, const auto& b) { return a.name() < b.name(); }));
}

TEST(Spec, ShippedConfigsMatchTheThreeProtocols) {
  const std::string dir = DOUGHROLL_CONFIG_DIR;
  const auto e1 = dr::ExperimentSpec::load(dir + "/experiment1.toml");
  EXPECT_EQ(e1.cells().size(), 20u);
  EXPECT_EQ(e1.trials * static_cast<int>(e1.cells().size()), 120);
  EXPECT_EQ(e1.episode.plan.horizon, 10);
  EXPECT_EQ(e1.episode.refit_period, 10);
  EXPECT_EQ(e1.episode.plan.cem.samples, 100);
  EXPECT_EQ(e1.episode.plan.cem.iterations, 3);
  EXPECT_EQ(e1.episode.plan.cem.smoothing, 0.5);

  const auto e2 = dr::ExperimentSpec::load(dir + "/experiment2.toml");
  EXPECT_EQ(e2.trials, 15);
  std::vector<std::string> names;
  for (const auto& c : e2.cells()) names.push_back(c.name());
  EXPECT_EQ(names, (std::vector<std::string>{
                       "A_6in_mpc_powell_wrong_fixed", "A_6in_mpc_powell_wrong_iterative",
                       "C_4in_mpc_powell_wrong_fixed", "C_4in_mpc_powell_wrong_iterative"}));

  const auto e3 = dr::ExperimentSpec::load(dir + "/experiment3.toml");
  EXPECT_EQ(e3.trials, 10);
  EXPECT_EQ(e3.cells().size(), 6u);
  for (const auto& c : e3.cells()) {
    EXPECT_EQ(c.goal_in, c.material == "A" ? 6.0 : c.material == "B" ? 5.0 : 4.0);
  }
  for (const auto* s : {&e2, &e3}) {
    EXPECT_EQ(s->episode.plan.horizon, 5);
    EXPECT_EQ(s->episode.refit_period, 5);
  }
}

TEST(Spec, ParsesEveryKey) {
  const auto s = parse_spec(
      "[experiment]\nname = e\ngoals_m = [0.1524]\ntrials = 4\nseed = 9\ntrain_seed = 3\n"
      "out = results\njobs = 3\n"
      "[episode]\nepsilon = 0.02\nmax_steps = 50\nrefit_period = 5\non_policy_weight = 4\n"
      "[planning]\nhorizon = 5\n"
      "[sim]\nflow_coeff = 0.01\n"
      "[stiffness]\nhydrated = A\ndry = B\n");
  EXPECT_EQ(s.name, "e");
  EXPECT_NEAR(s.goals_in[0], 6.0, 1e-12);
  EXPECT_EQ(s.trials, 4);
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(s.train_seed, 3u);
  EXPECT_EQ(s.out_dir, "results");
  EXPECT_EQ(s.jobs, 3);
  EXPECT_EQ(s.episode.epsilon, 0.02);
  EXPECT_EQ(s.episode.max_steps, 50);
  EXPECT_EQ(s.episode.refit_period, 5);
  EXPECT_EQ(s.episode.on_policy_weight, 4.0);
  EXPECT_EQ(s.episode.plan.horizon, 5);
  EXPECT_EQ(s.sim.flow_coeff, 0.01);
  EXPECT_EQ(s.dry, "B");
}

TEST(Spec, RejectsInvalidSpecs) {
  EXPECT_THROW(parse_spec("[experiment]\ntrials = 0\n"), dr::Error);
  EXPECT_THROW(parse_spec("[experiment]\ngoals_in = [2, -1]\n"), dr::Error);
  EXPECT_THROW(parse_spec("[experiment]\nmaterials = [A, Z]\n"), dr::Error);
  EXPECT_THROW(parse_spec("[experiment]\nname = \"a/b\"\n"), dr::Error);
  EXPECT_THROW(parse_spec("[experiment]\ngoals_in = [2]\ngoals_m = [0.1]\n"), dr::Error);
  EXPECT_THROW(parse_spec("[experiment]\nmaterials = [A, C]\ngoals_in = [2]\npair_goals = 1\n"),
               dr::Error);
  EXPECT_THROW(parse_spec("[experiment]\npolicies = [greedy]\n"), dr::Error);
  EXPECT_THROW(parse_spec("[stiffness]\nhydrated = C\ndry = A\n"), dr::Error);
  EXPECT_THROW(parse_spec("[models]\nA = missing_model.txt\n"), dr::Error);
  EXPECT_THROW(parse_spec("[episode]\nepsilon = 0\n"), dr::Error);
  EXPECT_THROW(dr::ExperimentSpec::load("/nonexistent/spec.toml"), dr::Error);
}

TEST(Spec, RelativeFilesResolveAgainstConfigDirectory) {
  const auto dir = scratch("paths");
  const auto t = dr::train_material("A", 1, {});
  {
    std::ofstream d(dir / "a.csv");
    dr::write_dataset(d, t.rows);
    std::ofstream m(dir / "a.model");
    dr::write_model(m, t.model);
  }
  {
    std::ofstream cfg(dir / "spec.toml");
    cfg << "[experiment]\nout = out_here\n[models]\nA = a.model\n[datasets]\nA = a.csv\n";
  }
  const auto s = dr::ExperimentSpec::load((dir / "spec.toml").string());
  EXPECT_EQ(fs::path(s.model_files.at("A")), dir / "a.model");
  EXPECT_EQ(s.out_dir, "out_here");
  const auto bank = dr::ModelBank::build(s);
  EXPECT_EQ(bank.get("A").model.theta, t.model.theta);
  EXPECT_EQ(bank.get("A").data.size(), 600u);
  EXPECT_THROW(bank.get("C"), dr::Error);

  std::ofstream bad(dir / "bad.toml");
  bad << "[models]\nA = a.model\n";
  bad.close();
  EXPECT_THROW(dr::ExperimentSpec::load((dir / "bad.toml").string()), dr::Error);
}

TEST(Statistics, DescribeMatchesReferenceValues) {
  const std::vector<double> xs{10, 12, 14, 16, 18, 20};
  double mean = 0, sd = 0, ci = 0;
  dr::describe(xs, mean, sd, ci);
  EXPECT_DOUBLE_EQ(mean, 15.0);
  EXPECT_NEAR(sd, std::sqrt(14.0), 1e-12);
  // t_{0.975, 5} = 2.570581835636314
  EXPECT_NEAR(ci, 2.570581835636314 * std::sqrt(14.0) / std::sqrt(6.0), 1e-12);
  const std::vector<double> one{7};
  dr::describe(one, mean, sd, ci);
  EXPECT_EQ(mean, 7.0);
  EXPECT_EQ(sd, 0.0);
  EXPECT_EQ(ci, 0.0);
}

TEST(WrongModel, PartnerAssignment) {
  const dr::ExperimentSpec s;
  EXPECT_EQ(dr::wrong_model_for(s, "A", 0), "C");
  EXPECT_EQ(dr::wrong_model_for(s, "C", 3), "A");
  EXPECT_EQ(dr::wrong_model_for(s, "B", 0), "A");
  EXPECT_EQ(dr::wrong_model_for(s, "B", 1), "C");
}

TEST(Trial, InitModesSeedTheRightModel) {
  auto s = small_spec(scratch("trial"));
  const auto bank = dr::ModelBank::build(s);
  const auto force = dr::calibrated_force_model(s);
  const dr::Cell wrong{"A", 3, dr::Policy::kMpcPowell, dr::InitMode::kWrong,
                       dr::ModelMode::kIterative};
  const auto w = dr::run_trial(s, bank, force, wrong, 0);
  EXPECT_EQ(w.init_model, "C");
  EXPECT_EQ(w.log.find_extra("init_model"), "C");

  const dr::Cell stiff{"B", 3, dr::Policy::kMpcPowell, dr::InitMode::kStiffness,
                       dr::ModelMode::kIterative};
  const auto b = dr::run_trial(s, bank, force, stiff, 1);
  ASSERT_TRUE(b.beta && b.sigma);
  EXPECT_NEAR(*b.sigma, 0.85, 0.15 * 0.85);
  EXPECT_NEAR(*b.beta, 0.486, 0.2);
  EXPECT_EQ(b.init_model, "blend");
  EXPECT_EQ(std::stod(*b.log.find_extra("beta")), *b.beta);

  const dr::Cell heur{"B", 3, dr::Policy::kHeuristic, dr::InitMode::kStiffness,
                      dr::ModelMode::kIterative};
  EXPECT_TRUE(dr::run_trial(s, bank, force, heur, 0).init_model.empty());
}

TEST(Trial, SameDoughAcrossCells) {
  auto s = small_spec(scratch("same"));
  const auto bank = dr::ModelBank::build(s);
  const auto force = dr::calibrated_force_model(s);
  const dr::Cell a{"A", 3, dr::Policy::kHeuristic, dr::InitMode::kCorrect,
                   dr::ModelMode::kIterative};
  const dr::Cell b{"A", 3, dr::Policy::kMpcPowell, dr::InitMode::kWrong,
                   dr::ModelMode::kIterative};
  const auto ra = dr::run_trial(s, bank, force, a, 2);
  const auto rb = dr::run_trial(s, bank, force, b, 2);
  EXPECT_EQ(ra.log.records.front().observed.shape(), rb.log.records.front().observed.shape());
}

TEST(Experiment, WritesLogsSummaryAndPlotDeterministically) {
  const auto out1 = scratch("run1"), out2 = scratch("run2");
  const auto r1 = dr::run_experiment(small_spec(out1));
  auto spec2 = small_spec(out2);
  spec2.jobs = 1;
  dr::run_experiment(spec2);

  const auto dir = out1 / "small";
  // 2 materials x 2 policies x 3 inits x 3 trials.
  std::size_t logs = 0;
  for (const auto& cell : fs::directory_iterator(dir)) {
    if (!cell.is_directory()) continue;
    for (const auto& f : fs::directory_iterator(cell.path())) {
      ++logs;
      std::ifstream in(f.path());
      const auto log = dr::read_log(in);
      EXPECT_TRUE(dr::validate_log(log).empty()) << f.path();
    }
  }
  EXPECT_EQ(logs, 36u);
  EXPECT_EQ(r1.summary.size(), 12u);
  EXPECT_EQ(slurp(dir / "summary.csv"), slurp(out2 / "small" / "summary.csv"));
  EXPECT_EQ(slurp(dir / "plot.csv"), slurp(out2 / "small" / "plot.csv"));
  EXPECT_EQ(slurp(dir / "A_3in_mpc_powell_wrong_iterative" / "trial_002.csv"),
            slurp(out2 / "small" / "A_3in_mpc_powell_wrong_iterative" / "trial_002.csv"));

  // Summary recomputed from the logs on disk matches the emitted one.
  std::ostringstream again;
  dr::write_summary(again, dr::summarize_logs(dir));
  EXPECT_EQ(again.str(), slurp(dir / "summary.csv"));

  const auto summary = slurp(dir / "summary.csv");
  EXPECT_EQ(summary.substr(0, summary.find('\n')), dr::kSummaryHeader);
  const auto plot = slurp(dir / "plot.csv");
  EXPECT_NE(plot.find("3,A,mpc_powell/stiffness,"), std::string::npos);
}

TEST(Experiment, TrialFaultsAreRecordedAndRunContinues) {
  const auto out = scratch("fault");
  auto s = small_spec(out);
  s.materials = {"A"};
  s.policies = {dr::Policy::kRandom};
  s.init_modes = {dr::InitMode::kCorrect};
  // Dough too thin for the camera to see above the table.
  s.sim.dough_diameter = 0.003;
  s.sim.cloud_noise = 0.0;
  const auto r = dr::run_experiment(s);
  ASSERT_EQ(r.summary.size(), 1u);
  EXPECT_EQ(r.summary[0].faults, 3);
  EXPECT_EQ(r.summary[0].reached, 0);
  std::ifstream in(out / "small" / "A_3in_random_correct_iterative" / "trial_000.csv");
  const auto log = dr::read_log(in);
  EXPECT_EQ(log.outcome, dr::Outcome::kFault);
  EXPECT_FALSE(log.fault.empty());
}
