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

// Learned transition model: weighted degree-2 polynomial regression from
// (l, w, h, band_length, depth) to the change in (l, w, h).

#ifndef DOUGHROLL_DYNMODEL_HPP_
#define DOUGHROLL_DYNMODEL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "doughroll/common.hpp"

namespace doughroll {

inline constexpr int kNumInputs = 5;
inline constexpr int kNumFeatures = 21;  // C(5 + 2, 2)
inline constexpr int kNumOutputs = 3;

using FeatureVector = std::array<double, kNumFeatures>;
using Coefficients = Eigen::Matrix<double, kNumFeatures, kNumOutputs>;

// Feature order: 1, x1..x5, then x_i * x_j for i <= j in row-major order
// (x1x1, x1x2, ..., x1x5, x2x2, ..., x5x5), with
// x = (l, w, h, band_length, depth).
inline FeatureVector feature_map(const Shape& s, const RollAction& a) {
  const std::array<double, kNumInputs> x{s.length, s.width, s.height, a.band_length,
                                         a.depth};
  FeatureVector f{};
  std::size_t k = 0;
  f[k++] = 1.0;
  for (double xi : x) f[k++] = xi;
  for (int i = 0; i < kNumInputs; ++i) {
    for (int j = i; j < kNumInputs; ++j) f[k++] = x[i] * x[j];
  }
  return f;
}

inline std::vector<std::string> feature_names() {
  const char* in[kNumInputs] = {"l", "w", "h", "band", "depth"};
  std::vector<std::string> names{"1"};
  for (auto* n : in) names.emplace_back(n);
  for (int i = 0; i < kNumInputs; ++i) {
    for (int j = i; j < kNumInputs; ++j) {
      names.push_back(std::string(in[i]) + "*" + in[j]);
    }
  }
  return names;
}

struct Transition {
  Shape state;
  RollAction action;
  Shape next;
  double weight = 1.0;
};

struct TransitionModel {
  Coefficients theta = Coefficients::Zero();
  // Weighted RMS training residual over all three outputs, m.
  double residual = 0.0;
};

struct FitOptions {
  // Tikhonov term, applied to column-equilibrated features.
  double ridge = 1e-8;
};

namespace detail {

inline void check_transition(const Transition& t) {
  const auto finite = [](const Shape& s) {
    return std::isfinite(s.length) && std::isfinite(s.width) && std::isfinite(s.height);
  };
  if (!(t.weight > 0.0) || !std::isfinite(t.weight) || !finite(t.state) ||
      !finite(t.next) || !std::isfinite(t.action.band_length) ||
      !std::isfinite(t.action.depth)) {
    throw Error("transitions need finite entries and positive weight");
  }
}

}  // namespace detail

// Minimizes sum_i w_i ||(next_i - state_i) - theta^T phi_i||^2 + ridge ||D theta||^2
// where D scales each feature column to unit weighted RMS. Solved as an
// augmented least-squares problem with column-pivoted QR.
inline TransitionModel fit(std::span<const Transition> data, const FitOptions& opts = {}) {
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n == 0) throw SingularSystemError("cannot fit a transition model to no data");

  Eigen::MatrixXd phi(n, kNumFeatures);
  Eigen::MatrixXd y(n, kNumOutputs);
  double wsum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = data[static_cast<std::size_t>(i)];
    detail::check_transition(t);
    const double sw = std::sqrt(t.weight);
    const auto f = feature_map(t.state, t.action);
    for (int j = 0; j < kNumFeatures; ++j) phi(i, j) = sw * f[j];
    y(i, 0) = sw * (t.next.length - t.state.length);
    y(i, 1) = sw * (t.next.width - t.state.width);
    y(i, 2) = sw * (t.next.height - t.state.height);
    wsum += t.weight;
  }

  Eigen::VectorXd scale(kNumFeatures);
  for (int j = 0; j < kNumFeatures; ++j) {
    const double rms = std::sqrt(phi.col(j).squaredNorm() / wsum);
    scale(j) = rms > 0.0 ? 1.0 / rms : 1.0;
  }
  Eigen::MatrixXd a = phi * scale.asDiagonal();

  Eigen::MatrixXd sol;
  if (opts.ridge > 0.0) {
    Eigen::MatrixXd aug(n + kNumFeatures, kNumFeatures);
    aug << a, std::sqrt(opts.ridge) * Eigen::MatrixXd::Identity(kNumFeatures, kNumFeatures);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + kNumFeatures, kNumOutputs);
    rhs.topRows(n) = y;
    sol = aug.colPivHouseholderQr().solve(rhs);
  } else {
    const auto qr = a.colPivHouseholderQr();
    if (qr.rank() < kNumFeatures) {
      throw SingularSystemError("feature matrix is rank deficient; enable ridge");
    }
    sol = qr.solve(y);
  }

  TransitionModel m;
  m.theta = scale.asDiagonal() * sol;
  if (!m.theta.allFinite()) throw SingularSystemError("non-finite regression solution");
  const Eigen::MatrixXd resid = phi * m.theta - y;
  m.residual = std::sqrt(resid.squaredNorm() / (wsum * kNumOutputs));
  return m;
}

inline constexpr double kMinPredicted = 0.001;
inline constexpr double kMaxPredicted = 1.0;

inline Shape predict(const TransitionModel& m, const Shape& s, const RollAction& a) {
  const auto f = feature_map(s, a);
  std::array<double, kNumOutputs> d{};
  for (int o = 0; o < kNumOutputs; ++o) {
    double acc = 0.0;
    for (int j = 0; j < kNumFeatures; ++j) acc += m.theta(j, o) * f[j];
    d[o] = acc;
  }
  return {std::clamp(s.length + d[0], kMinPredicted, kMaxPredicted),
          std::clamp(s.width + d[1], kMinPredicted, kMaxPredicted),
          std::clamp(s.height + d[2], kMinPredicted, kMaxPredicted)};
}

// (1 - beta) * hydrated + beta * dry. beta outside [0, 1] is clamped and
// reported through `clamped`.
inline Shape blend_predict(const TransitionModel& hydrated, const TransitionModel& dry,
                           double beta, const Shape& s, const RollAction& a,
                           bool* clamped = nullptr) {
  const double b = std::clamp(beta, 0.0, 1.0);
  if (clamped != nullptr) *clamped = (b != beta);
  const Shape ph = predict(hydrated, s, a);
  const Shape pd = predict(dry, s, a);
  return {(1.0 - b) * ph.length + b * pd.length, (1.0 - b) * ph.width + b * pd.width,
          (1.0 - b) * ph.height + b * pd.height};
}

// Fit over d_off (weights as given) and d_on with every on-policy weight set to
// on_weight.
inline TransitionModel refit_with_onpolicy(std::span<const Transition> d_off,
                                           std::span<const Transition> d_on,
                                           double on_weight = 10.0,
                                           const FitOptions& opts = {}) {
  std::vector<Transition> all(d_off.begin(), d_off.end());
  all.reserve(d_off.size() + d_on.size());
  for (auto t : d_on) {
    t.weight = on_weight;
    all.push_back(t);
  }
  return fit(all, opts);
}

// Stiffness-blended pair of models.
struct BlendedModel {
  TransitionModel hydrated;
  TransitionModel dry;
  double beta = 0.0;
};

// What the planners roll forward: a single fitted model or a blend.
using Dynamics = std::variant<TransitionModel, BlendedModel>;

inline Shape predict(const Dynamics& d, const Shape& s, const RollAction& a) {
  if (const auto* m = std::get_if<TransitionModel>(&d)) return predict(*m, s, a);
  const auto& b = std::get<BlendedModel>(d);
  return blend_predict(b.hydrated, b.dry, b.beta, s, a);
}

// RMS prediction error per output over `data`, m.
inline std::array<double, kNumOutputs> prediction_rmse(const TransitionModel& m,
                                                       std::span<const Transition> data) {
  std::array<double, kNumOutputs> ss{};
  for (const auto& t : data) {
    const Shape p = predict(m, t.state, t.action);
    ss[0] += (p.length - t.next.length) * (p.length - t.next.length);
    ss[1] += (p.width - t.next.width) * (p.width - t.next.width);
    ss[2] += (p.height - t.next.height) * (p.height - t.next.height);
  }
  const double n = data.empty() ? 1.0 : static_cast<double>(data.size());
  for (auto& v : ss) v = std::sqrt(v / n);
  return ss;
}

// Model file: a versioned header naming the feature order, inputs and outputs,
// then the 21 x 3 coefficient matrix row by row in round-trip precision.
inline void write_model(std::ostream& out, const TransitionModel& m) {
  out << "doughroll-transition-model 1\n";
  out << "features " << kNumFeatures;
  for (const auto& n : feature_names()) out << ' ' << n;
  out << "\ninputs l w h band_length depth\n";
  out << "outputs dl dw dh\n";
  out << std::setprecision(17) << "residual " << m.residual << '\n';
  out << "theta " << kNumFeatures << ' ' << kNumOutputs << '\n';
  for (int j = 0; j < kNumFeatures; ++j) {
    out << m.theta(j, 0) << ' ' << m.theta(j, 1) << ' ' << m.theta(j, 2) << '\n';
  }
}

inline TransitionModel read_model(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, "unexpected end of model file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return std::istringstream(line);
  };
  auto expect = [&](std::istringstream& ss, const std::string& key) {
    std::string k;
    if (!(ss >> k) || k != key) throw ParseError(lineno, "expected '" + key + "'");
  };

  {
    auto ss = next_line();
    expect(ss, "doughroll-transition-model");
    int version = 0;
    if (!(ss >> version) || version != 1) throw ParseError(lineno, "unsupported model version");
  }
  {
    auto ss = next_line();
    expect(ss, "features");
    int count = 0;
    ss >> count;
    std::vector<std::string> names;
    for (std::string n; ss >> n;) names.push_back(n);
    if (count != kNumFeatures || names != feature_names()) {
      throw ParseError(lineno, "feature ordering does not match this build");
    }
  }
  {
    auto ss = next_line();
    expect(ss, "inputs");
  }
  {
    auto ss = next_line();
    expect(ss, "outputs");
  }
  TransitionModel m;
  {
    auto ss = next_line();
    expect(ss, "residual");
    if (!(ss >> m.residual)) throw ParseError(lineno, "bad residual");
  }
  {
    auto ss = next_line();
    expect(ss, "theta");
    int r = 0, c = 0;
    if (!(ss >> r >> c) || r != kNumFeatures || c != kNumOutputs) {
      throw ParseError(lineno, "theta must be 21 x 3");
    }
  }
  for (int j = 0; j < kNumFeatures; ++j) {
    auto ss = next_line();
    std::string extra;
    if (!(ss >> m.theta(j, 0) >> m.theta(j, 1) >> m.theta(j, 2)) || (ss >> extra)) {
      throw ParseError(lineno, "expected three coefficients");
    }
  }
  if (!m.theta.allFinite()) throw ParseError(lineno, "non-finite coefficient");
  return m;
}

// Transition dataset CSV.
inline constexpr const char* kDatasetHeader =
    "init,step,l,w,h,band_length,depth,next_l,next_w,next_h,weight";

struct DatasetRow {
  int init = 0;
  int step = 0;
  Transition t;
};

inline void write_dataset(std::ostream& out, std::span<const DatasetRow> rows) {
  out << kDatasetHeader << '\n' << std::setprecision(17);
  for (const auto& r : rows) {
    const auto& t = r.t;
    out << r.init << ',' << r.step << ',' << t.state.length << ',' << t.state.width << ','
        << t.state.height << ',' << t.action.band_length << ',' << t.action.depth << ','
        << t.next.length << ',' << t.next.width << ',' << t.next.height << ',' << t.weight
        << '\n';
  }
}

inline std::vector<DatasetRow> read_dataset(std::istream& in) {
  std::vector<DatasetRow> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != kDatasetHeader) throw ParseError(lineno, "unexpected dataset header");
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 11) throw ParseError(lineno, "expected 11 columns");
    double v[11];
    for (int i = 0; i < 11; ++i) {
      std::size_t used = 0;
      try {
        v[i] = std::stod(cells[static_cast<std::size_t>(i)], &used);
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad number in column " + std::to_string(i + 1));
      }
      if (used != cells[static_cast<std::size_t>(i)].size() || !std::isfinite(v[i])) {
        throw ParseError(lineno, "bad number in column " + std::to_string(i + 1));
      }
    }
    DatasetRow r;
    r.init = static_cast<int>(v[0]);
    r.step = static_cast<int>(v[1]);
    r.t.state = {v[2], v[3], v[4]};
    r.t.action = {v[5], v[6]};
    r.t.next = {v[7], v[8], v[9]};
    r.t.weight = v[10];
    if (!(r.t.weight > 0.0)) throw ParseError(lineno, "weight must be positive");
    rows.push_back(r);
  }
  if (!header) throw ParseError(lineno + 1, "missing dataset header");
  return rows;
}

inline std::vector<Transition> transitions_of(std::span<const DatasetRow> rows) {
  std::vector<Transition> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.t);
  return out;
}

}  // namespace doughroll

#endif  // DOUGHROLL_DYNMODEL_HPP_
