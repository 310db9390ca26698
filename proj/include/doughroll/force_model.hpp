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

#ifndef DOUGHROLL_FORCE_MODEL_HPP_
#define DOUGHROLL_FORCE_MODEL_HPP_

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doughroll/common.hpp"

namespace doughroll {

// One calibration measurement: band length (m), indentation depth (m) and
// the measured load (N).
struct ForceSample {
  double band_length = 0.0;
  double depth = 0.0;
  double force = 0.0;
};

// Contact force of the stretched band pressed into the dough:
//
//   F = scale * (band_length / ref_length)^stretch_exp * (depth_mm)^depth_exp
//
// scale is the force at the reference stretch and 1 mm indentation.
struct ForceModel {
  double scale = 0.5;
  double stretch_exp = 1.2;
  double depth_exp = 1.3;
  double ref_length = 0.06;
  // RMS relative residual of the calibration fit.
  double residual = 0.0;
  // Calibrated box; evaluations outside it are extrapolations.
  double band_lo = 0.0, band_hi = std::numeric_limits<double>::infinity();
  double depth_lo = 0.0, depth_hi = std::numeric_limits<double>::infinity();

  bool in_range(double band_length, double depth) const {
    return band_length >= band_lo && band_length <= band_hi && depth >= depth_lo &&
           depth <= depth_hi;
  }
};

inline double predict_force(const ForceModel& m, double band_length, double depth) {
  if (depth <= 0.0 || band_length <= 0.0) return 0.0;
  return m.scale * std::pow(band_length / m.ref_length, m.stretch_exp) *
         std::pow(depth * 1000.0, m.depth_exp);
}

// Log-linear least squares on the strictly positive rows. Rows with zero
// depth carry no information about the exponents and are only range-checked.
inline ForceModel fit_force_model(std::span<const ForceSample> data,
                                  double ref_length = 0.06) {
  if (data.size() < 12) {
    throw CalibrationError("force calibration needs at least 12 samples");
  }
  std::vector<const ForceSample*> rows;
  ForceModel m;
  m.ref_length = ref_length;
  m.band_lo = m.depth_lo = std::numeric_limits<double>::infinity();
  m.band_hi = m.depth_hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : data) {
    if (!std::isfinite(s.band_length) || !std::isfinite(s.depth) ||
        !std::isfinite(s.force) || s.band_length <= 0.0 || s.depth < 0.0 ||
        s.force < 0.0) {
      throw CalibrationError("calibration rows must be finite and non-negative");
    }
    m.band_lo = std::min(m.band_lo, s.band_length);
    m.band_hi = std::max(m.band_hi, s.band_length);
    m.depth_lo = std::min(m.depth_lo, s.depth);
    m.depth_hi = std::max(m.depth_hi, s.depth);
    if (s.depth > 0.0 && s.force > 0.0) rows.push_back(&s);
  }
  if (rows.size() < 3) {
    throw CalibrationError("too few loaded rows to fit the force surface");
  }

  Eigen::MatrixXd a(rows.size(), 3);
  Eigen::VectorXd y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::log(rows[i]->band_length / ref_length);
    a(i, 2) = std::log(rows[i]->depth * 1000.0);
    y(i) = std::log(rows[i]->force);
  }
  const Eigen::Vector3d x = a.colPivHouseholderQr().solve(y);
  if (a.colPivHouseholderQr().rank() < 3) {
    throw CalibrationError("calibration grid does not vary both band length and depth");
  }
  m.scale = std::exp(x(0));
  m.stretch_exp = x(1);
  m.depth_exp = x(2);

  // Monotone in depth (strictly) and in stretch over the calibrated range.
  if (!(m.depth_exp > 0.0) || m.stretch_exp < 0.0) {
    throw CalibrationError("fitted force surface is not monotone over the range");
  }

  double ss = 0.0;
  for (const auto* r : rows) {
    const double rel = predict_force(m, r->band_length, r->depth) / r->force - 1.0;
    ss += rel * rel;
  }
  m.residual = std::sqrt(ss / static_cast<double>(rows.size()));
  return m;
}

// Synthetic calibration grid over (band length, depth) with multiplicative
// Gaussian measurement noise.
inline std::vector<ForceSample> synth_calibration(const ForceModel& truth,
                                                  std::span<const double> band_lengths,
                                                  std::span<const double> depths,
                                                  double rel_noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<ForceSample> out;
  for (double ell : band_lengths) {
    for (double d : depths) {
      const double f = predict_force(truth, ell, d) * (1.0 + rel_noise * n01(rng));
      out.push_back({ell, d, std::max(f, 0.0)});
    }
  }
  return out;
}

inline std::vector<ForceSample> default_calibration() {
  const double bands[] = {0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.11, 0.12};
  const double depths[] = {0.0, 0.002, 0.004, 0.006, 0.008, 0.010, 0.012, 0.015, 0.020};
  return synth_calibration(ForceModel{}, bands, depths, 0.02, 20210601);
}

// CSV: header "band_length_m,depth_m,force_n", then one row per sample.
inline std::vector<ForceSample> read_calibration_csv(std::istream& in) {
  std::vector<ForceSample> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "band_length_m,depth_m,force_n") {
        throw ParseError(lineno, "expected header band_length_m,depth_m,force_n");
      }
      header = true;
      continue;
    }
    std::istringstream ss(line);
    ForceSample s;
    char c1 = 0, c2 = 0;
    std::string rest;
    if (!(ss >> s.band_length >> c1 >> s.depth >> c2 >> s.force) || c1 != ',' ||
        c2 != ',' || (ss >> rest)) {
      throw ParseError(lineno, "expected three comma-separated numbers");
    }
    out.push_back(s);
  }
  if (!header) throw ParseError(lineno + 1, "missing calibration header");
  return out;
}

inline void write_calibration_csv(std::ostream& out, std::span<const ForceSample> data) {
  out << "band_length_m,depth_m,force_n\n" << std::setprecision(17);
  for (const auto& s : data) {
    out << s.band_length << ',' << s.depth << ',' << s.force << '\n';
  }
}

inline void write_force_model(std::ostream& out, const ForceModel& m) {
  out << "doughroll-force-model 1\n"
      << "form F=scale*(band_length/ref_length)^stretch_exp*(depth_mm)^depth_exp\n"
      << std::setprecision(17) << "scale " << m.scale << '\n'
      << "stretch_exp " << m.stretch_exp << '\n'
      << "depth_exp " << m.depth_exp << '\n'
      << "ref_length " << m.ref_length << '\n'
      << "residual " << m.residual << '\n'
      << "band_range " << m.band_lo << ' ' << m.band_hi << '\n'
      << "depth_range " << m.depth_lo << ' ' << m.depth_hi << '\n';
}

inline ForceModel read_force_model(std::istream& in) {
  ForceModel m;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const std::string& key) {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, "unexpected end of file");
    ++lineno;
    std::istringstream ss(line);
    std::string k;
    ss >> k;
    if (k != key) throw ParseError(lineno, "expected key '" + key + "'");
    return ss;
  };
  {
    auto ss = next("doughroll-force-model");
    int version = 0;
    if (!(ss >> version) || version != 1) throw ParseError(lineno, "unsupported version");
  }
  next("form");
  auto read1 = [&](const std::string& key, double& v) {
    auto ss = next(key);
    if (!(ss >> v)) throw ParseError(lineno, "bad value for " + key);
  };
  read1("scale", m.scale);
  read1("stretch_exp", m.stretch_exp);
  read1("depth_exp", m.depth_exp);
  read1("ref_length", m.ref_length);
  read1("residual", m.residual);
  {
    auto ss = next("band_range");
    if (!(ss >> m.band_lo >> m.band_hi)) throw ParseError(lineno, "bad band_range");
  }
  {
    auto ss = next("depth_range");
    if (!(ss >> m.depth_lo >> m.depth_hi)) throw ParseError(lineno, "bad depth_range");
  }
  return m;
}

}  // namespace doughroll

#endif  // DOUGHROLL_FORCE_MODEL_HPP_
