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

// Receding-horizon action selection under a learned model. The objective of
// an H-step sequence is sum_n gamma^n r(s_{n+1}) with r the negative
// Euclidean distance of (l, w, h) to the goal and states unrolled through the
// model. Two optimizers: the cross-entropy method and Powell's conjugate
// direction method with Brent line searches.

#ifndef DOUGHROLL_PLANNING_HPP_
#define DOUGHROLL_PLANNING_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "doughroll/common.hpp"
#include "doughroll/config.hpp"
#include "doughroll/dynmodel.hpp"

namespace doughroll {

struct CemConfig {
  int samples = 100;   // K
  int iterations = 3;  // M
  int elites = 10;     // N
  double smoothing = 0.5;
  double variance_floor = 1e-8;
  // Draw the standard-normal pool once and reuse it every iteration.
  bool reuse_noise = false;
  // Re-enter the previous iteration's elites into the candidate pool.
  bool keep_elites = false;
};

struct PowellConfig {
  int max_iters = 200;
  double x_tol = 1e-6;
  double f_tol = 1e-9;
  double line_tol = 1e-6;
  double penalty = 1e3;
};

struct PlanConfig {
  int horizon = 10;
  double gamma = 0.9;
  double band_max = 0.12;
  double depth_min = kMinPressDepth;
  CemConfig cem;
  PowellConfig powell;

  void validate() const {
    if (horizon < 1) throw Error("horizon must be at least 1");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error("gamma must lie in [0, 1]");
    if (cem.elites < 1 || cem.samples < cem.elites) {
      throw Error("CEM needs samples >= elites >= 1");
    }
    if (!(cem.smoothing >= 0.0 && cem.smoothing <= 1.0)) {
      throw Error("CEM smoothing must lie in [0, 1]");
    }
    if (!(band_max > 0.0)) throw Error("band_max must be positive");
  }

  static PlanConfig from_config(const KeyValueConfig& cfg,
                                const std::string& prefix = "planning.") {
    PlanConfig p;
    p.horizon = static_cast<int>(cfg.number_or(prefix + "horizon", p.horizon));
    p.gamma = cfg.number_or(prefix + "gamma", p.gamma);
    p.band_max = cfg.number_or(prefix + "ell_max", p.band_max);
    p.depth_min = cfg.number_or(prefix + "delta_min", p.depth_min);
    p.cem.samples = static_cast<int>(cfg.number_or(prefix + "cem.K", p.cem.samples));
    p.cem.iterations = static_cast<int>(cfg.number_or(prefix + "cem.M", p.cem.iterations));
    p.cem.elites = static_cast<int>(cfg.number_or(prefix + "cem.N", p.cem.elites));
    p.cem.smoothing = cfg.number_or(prefix + "cem.beta_cem", p.cem.smoothing);
    p.powell.max_iters =
        static_cast<int>(cfg.number_or(prefix + "powell.max_iters", p.powell.max_iters));
    p.powell.x_tol = cfg.number_or(prefix + "powell.x_tol", p.powell.x_tol);
    p.powell.f_tol = cfg.number_or(prefix + "powell.f_tol", p.powell.f_tol);
    p.powell.line_tol = cfg.number_or(prefix + "powell.line_tol", p.powell.line_tol);
    p.validate();
    return p;
  }
};

using ActionSequence = std::vector<RollAction>;

inline double reward(const Shape& s, const Shape& goal) { return -distance(s, goal); }

struct DistanceReward {
  double operator()(const Shape& s, const Shape& goal) const { return reward(s, goal); }
};

// Admissible box at a (predicted) state.
inline ActionBounds plan_bounds(const Shape& s, const PlanConfig& cfg) {
  ActionBounds b = ActionBounds::for_shape(s, cfg.band_max);
  b.depth_min = cfg.depth_min;
  b.depth_max = std::max(s.height, cfg.depth_min);
  return b;
}

// Clamps every action against the bounds of the state the model predicts it
// will be taken from.
template <class Model>
ActionSequence clamp_sequence(const Model& model, const Shape& s0,
                              std::span<const RollAction> seq, const PlanConfig& cfg) {
  ActionSequence out;
  out.reserve(seq.size());
  Shape s = s0;
  for (const auto& a : seq) {
    const RollAction c = plan_bounds(s, cfg).clamp(a);
    out.push_back(c);
    s = predict(model, s, c);
  }
  return out;
}

template <class Model, class RewardFn = DistanceReward>
double evaluate_sequence(const Model& model, const Shape& s0,
                         std::span<const RollAction> seq, const Shape& goal, double gamma,
                         const PlanConfig& cfg = {}, RewardFn r = {}) {
  double total = 0.0;
  double discount = 1.0;
  Shape s = s0;
  for (const auto& a : seq) {
    const RollAction c = plan_bounds(s, cfg).clamp(a);
    s = predict(model, s, c);
    total += discount * r(s, goal);
    discount *= gamma;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Powell's method.

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct PowellResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

inline constexpr double kGolden = 0.3819660112501051;  // (3 - sqrt 5) / 2

struct LineMin {
  double t = 0.0;
  double ft = 0.0;
};

// Brent's minimizer on [a, b] (fminbound style). Returns the best point seen.
template <class G>
LineMin brent_bounded(G&& g, double a, double b, double tol, int max_iter = 500) {
  double x = a + kGolden * (b - a);
  double w = x, v = x;
  double fx = g(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool golden = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm >= x) ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x >= xm) ? a - x : b - x;
      d = kGolden * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = g(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx};
}

// Downhill bracket (a, b, c) with f(b) <= f(a), f(b) <= f(c), by golden
// expansion from (0, step).
template <class G>
std::optional<std::array<double, 3>> bracket(G&& g, double f0, double step,
                                             int max_expand = 60) {
  constexpr double kGrow = 1.618033988749895;
  double a = 0.0, b = step, fa = f0, fb = g(b);
  if (fb > fa) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = b + kGrow * (b - a), fc = g(c);
  for (int i = 0; i < max_expand && fb > fc; ++i) {
    a = b; fa = fb;
    b = c; fb = fc;
    c = b + kGrow * (b - a);
    fc = g(c);
  }
  if (fb > fc) return std::nullopt;
  return std::array<double, 3>{std::min(a, c), b, std::max(a, c)};
}

}  // namespace detail

struct PowellOptions {
  int max_iters = 1000;
  double x_tol = 1e-10;
  double f_tol = 1e-14;
  double line_tol = 1e-8;
};

// Minimizes f from x0 along a maintained direction set. After each sweep the
// net displacement replaces the direction of largest decrease when Powell's
// test accepts it. With `box`, each line search stays inside the box.
template <class F>
PowellResult powell_minimize(F&& f, std::vector<double> x0, const PowellOptions& opt = {},
                             const std::optional<Box>& box = std::nullopt) {
  const std::size_t n = x0.size();
  PowellResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(std::span<const double>(x));
    if (!std::isfinite(v)) throw Error("Powell objective is not finite");
    return v;
  };

  std::vector<std::vector<double>> dirs(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double scale = 1.0;
    if (box) scale = std::max(box->upper[i] - box->lower[i], 1e-12);
    dirs[i][i] = scale;
  }

  std::vector<double> x = std::move(x0);
  if (box) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], box->lower[i], box->upper[i]);
  }
  double fx = eval(x);

  // Line search along d from x; accepts only strict improvement.
  auto line = [&](const std::vector<double>& d) -> double {
    std::vector<double> trial(n);
    auto g = [&](double t) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + t * d[i];
      return eval(trial);
    };
    detail::LineMin best{0.0, fx};
    if (box) {
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        if (d[i] == 0.0) continue;
        const double t1 = (box->lower[i] - x[i]) / d[i];
        const double t2 = (box->upper[i] - x[i]) / d[i];
        lo = std::max(lo, std::min(t1, t2));
        hi = std::min(hi, std::max(t1, t2));
      }
      if (!(hi > lo)) return fx;
      best = detail::brent_bounded(g, lo, hi, opt.line_tol);
    } else {
      const auto br = detail::bracket(g, fx, 1.0);
      if (!br) return fx;
      best = detail::brent_bounded(g, (*br)[0], (*br)[2], opt.line_tol);
    }
    if (best.ft < fx) {
      for (std::size_t i = 0; i < n; ++i) x[i] += best.t * d[i];
      fx = best.ft;
    }
    return fx;
  };

  for (res.iterations = 0; res.iterations < opt.max_iters;) {
    ++res.iterations;
    const std::vector<double> x_start = x;
    const double f_start = fx;
    double biggest = 0.0;
    std::size_t big_i = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double before = fx;
      line(dirs[i]);
      if (before - fx > biggest) {
        biggest = before - fx;
        big_i = i;
      }
    }

    double step2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) step2 += (x[i] - x_start[i]) * (x[i] - x_start[i]);
    if (2.0 * (f_start - fx) <= opt.f_tol || std::sqrt(step2) <= opt.x_tol) {
      res.converged = true;
      break;
    }

    std::vector<double> d(n), xe(n);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = x[i] - x_start[i];
      xe[i] = x[i] + d[i];
    }
    bool extrapolate_ok = true;
    if (box) {
      for (std::size_t i = 0; i < n; ++i) {
        if (xe[i] < box->lower[i] || xe[i] > box->upper[i]) extrapolate_ok = false;
      }
    }
    if (!extrapolate_ok) continue;
    const double fe = eval(xe);
    if (fe < f_start) {
      const double a = f_start - fx - biggest;
      const double b = f_start - fe;
      const double t = 2.0 * (f_start - 2.0 * fx + fe) * a * a - biggest * b * b;
      if (t < 0.0) {
        line(d);
        dirs.erase(dirs.begin() + static_cast<std::ptrdiff_t>(big_i));
        dirs.push_back(d);
      }
    }
  }
  res.x = std::move(x);
  res.fx = fx;
  return res;
}

// ---------------------------------------------------------------------------
// Planners.

namespace detail {

inline std::vector<double> flatten(std::span<const RollAction> seq) {
  std::vector<double> x;
  x.reserve(2 * seq.size());
  for (const auto& a : seq) {
    x.push_back(a.band_length);
    x.push_back(a.depth);
  }
  return x;
}

inline ActionSequence unflatten(std::span<const double> x) {
  ActionSequence seq(x.size() / 2);
  for (std::size_t t = 0; t < seq.size(); ++t) seq[t] = {x[2 * t], x[2 * t + 1]};
  return seq;
}

}  // namespace detail

inline ActionSequence midpoint_sequence(const Shape& s0, const PlanConfig& cfg) {
  const ActionBounds b = plan_bounds(s0, cfg);
  return ActionSequence(static_cast<std::size_t>(cfg.horizon),
                        {0.5 * (b.band_min + b.band_max), 0.5 * (b.depth_min + b.depth_max)});
}

struct PowellPlan {
  ActionSequence actions;
  double value = 0.0;
  bool converged = false;
};

// Maximizes the horizon objective over the flattened 2H vector. Trial points
// are clamped to their predicted-state bounds inside the objective and charged
// penalty * (violation)^2; line searches stay in the static box
// band in [kMinPredicted, band_max], depth in [depth_min, h0].
template <class Model, class RewardFn = DistanceReward>
PowellPlan plan_powell(const Model& model, const Shape& s0, const Shape& goal,
                       const PlanConfig& cfg,
                       std::optional<ActionSequence> warm_start = std::nullopt,
                       RewardFn r = {}) {
  cfg.validate();
  const auto h = static_cast<std::size_t>(cfg.horizon);
  ActionSequence init = warm_start ? *warm_start : midpoint_sequence(s0, cfg);
  init.resize(h, init.empty() ? midpoint_sequence(s0, cfg).front() : init.back());

  Box box;
  for (std::size_t t = 0; t < h; ++t) {
    box.lower.push_back(kMinPredicted);
    box.upper.push_back(cfg.band_max);
    box.lower.push_back(cfg.depth_min);
    box.upper.push_back(std::max(s0.height, cfg.depth_min));
  }

  auto objective = [&](std::span<const double> x) {
    double total = 0.0, discount = 1.0, violation = 0.0;
    Shape s = s0;
    for (std::size_t t = 0; t < h; ++t) {
      const RollAction raw{x[2 * t], x[2 * t + 1]};
      const RollAction c = plan_bounds(s, cfg).clamp(raw);
      violation += (raw.band_length - c.band_length) * (raw.band_length - c.band_length) +
                   (raw.depth - c.depth) * (raw.depth - c.depth);
      s = predict(model, s, c);
      total += discount * r(s, goal);
      discount *= cfg.gamma;
    }
    return -total + cfg.powell.penalty * violation;
  };

  PowellOptions opt;
  opt.max_iters = cfg.powell.max_iters;
  opt.x_tol = cfg.powell.x_tol;
  opt.f_tol = cfg.powell.f_tol;
  opt.line_tol = cfg.powell.line_tol;
  const PowellResult res = powell_minimize(objective, detail::flatten(init), opt, box);

  PowellPlan plan;
  plan.actions = clamp_sequence(model, s0, detail::unflatten(res.x), cfg);
  plan.value = evaluate_sequence(model, s0, plan.actions, goal, cfg.gamma, cfg, r);
  plan.converged = res.converged;
  return plan;
}

struct CemTrace {
  // Best elite score per iteration.
  std::vector<double> best_elite;
};

// Cross-entropy search over H-step sequences with diagonal Gaussians:
//   mu'  = beta * mean(elites) + (1 - beta) * mu
//   var' = beta * var(elites)  + (1 - beta) * var
// `project` maps a raw sample to an admissible sequence; `score` is maximized.
// Returns the projected final mean.
template <class Score, class Project>
ActionSequence cem_maximize(Score&& score, Project&& project, ActionSequence mean,
                            ActionSequence stddev, const CemConfig& cfg, Rng& rng,
                            CemTrace* trace = nullptr) {
  const std::size_t h = mean.size();
  const auto k = static_cast<std::size_t>(cfg.samples);
  const auto n = static_cast<std::size_t>(cfg.elites);
  std::normal_distribution<double> n01(0.0, 1.0);

  std::vector<double> var(2 * h);
  for (std::size_t t = 0; t < h; ++t) {
    var[2 * t] = stddev[t].band_length * stddev[t].band_length;
    var[2 * t + 1] = stddev[t].depth * stddev[t].depth;
  }

  std::vector<std::vector<double>> noise;
  auto draw = [&]() {
    noise.assign(k, std::vector<double>(2 * h));
    for (auto& z : noise) {
      for (auto& v : z) v = n01(rng);
    }
  };
  draw();

  std::vector<ActionSequence> elites_prev;
  for (int m = 0; m < cfg.iterations; ++m) {
    if (m > 0 && !cfg.reuse_noise) draw();
    std::vector<ActionSequence> pool;
    pool.reserve(k + elites_prev.size());
    for (std::size_t s = 0; s < k; ++s) {
      ActionSequence seq(h);
      for (std::size_t t = 0; t < h; ++t) {
        seq[t].band_length = mean[t].band_length + std::sqrt(var[2 * t]) * noise[s][2 * t];
        seq[t].depth = mean[t].depth + std::sqrt(var[2 * t + 1]) * noise[s][2 * t + 1];
      }
      pool.push_back(project(seq));
    }
    if (cfg.keep_elites) {
      for (auto& e : elites_prev) pool.push_back(std::move(e));
    }

    std::vector<double> scores(pool.size());
    for (std::size_t s = 0; s < pool.size(); ++s) scores[s] = score(pool[s]);
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    if (trace != nullptr) trace->best_elite.push_back(scores[order.front()]);

    std::vector<double> emean(2 * h, 0.0), evar(2 * h, 0.0);
    for (std::size_t e = 0; e < n; ++e) {
      const auto& seq = pool[order[e]];
      for (std::size_t t = 0; t < h; ++t) {
        emean[2 * t] += seq[t].band_length;
        emean[2 * t + 1] += seq[t].depth;
      }
    }
    for (auto& v : emean) v /= static_cast<double>(n);
    for (std::size_t e = 0; e < n; ++e) {
      const auto& seq = pool[order[e]];
      for (std::size_t t = 0; t < h; ++t) {
        const double db = seq[t].band_length - emean[2 * t];
        const double dd = seq[t].depth - emean[2 * t + 1];
        evar[2 * t] += db * db;
        evar[2 * t + 1] += dd * dd;
      }
    }
    for (auto& v : evar) v /= static_cast<double>(n);

    const double beta = cfg.smoothing;
    for (std::size_t t = 0; t < h; ++t) {
      mean[t].band_length = beta * emean[2 * t] + (1.0 - beta) * mean[t].band_length;
      mean[t].depth = beta * emean[2 * t + 1] + (1.0 - beta) * mean[t].depth;
    }
    for (std::size_t i = 0; i < 2 * h; ++i) {
      var[i] = std::max(beta * evar[i] + (1.0 - beta) * var[i], cfg.variance_floor);
    }

    elites_prev.clear();
    if (cfg.keep_elites) {
      for (std::size_t e = 0; e < n; ++e) elites_prev.push_back(pool[order[e]]);
    }
  }
  return project(mean);
}

template <class Model, class RewardFn = DistanceReward>
ActionSequence plan_cem(const Model& model, const Shape& s0, const Shape& goal,
                        const PlanConfig& cfg, Rng& rng, RewardFn r = {},
                        CemTrace* trace = nullptr) {
  cfg.validate();
  const ActionBounds b = plan_bounds(s0, cfg);
  ActionSequence mean = midpoint_sequence(s0, cfg);
  ActionSequence stddev(mean.size(), {0.5 * (b.band_max - b.band_min),
                                      0.5 * (b.depth_max - b.depth_min)});
  auto project = [&](const ActionSequence& seq) {
    return clamp_sequence(model, s0, seq, cfg);
  };
  auto score = [&](const ActionSequence& seq) {
    return evaluate_sequence(model, s0, seq, goal, cfg.gamma, cfg, r);
  };
  return cem_maximize(score, project, std::move(mean), std::move(stddev), cfg.cem, rng,
                      trace);
}

}  // namespace doughroll

#endif  // DOUGHROLL_PLANNING_HPP_
