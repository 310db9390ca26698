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

// Ground-truth dough environment.
//
// The dough is a half-ellipsoid resting on the table with full length l, full
// width w and height h, so its volume is (pi/6) l w h. A roll presses the
// elastic band into the dough with force F(band_length, depth). Below the
// yield force nothing changes. Above it the height drops by
//
//   d_p = flow_coeff * (s_ref / sigma)^k * h * ln(F / F_yield) * (band_length / band_max)
//
// where F_yield = yield_per_stiffness * sigma * (h_ref / h)^m hardens as the
// dough thins. The roll distance equals the band length, so longer bands
// roll further.
// Rolling also rounds the cross-section: the width/height aspect ratio rho
// relaxes toward 1 as rho' - 1 = (rho - 1) (h'/h)^rounding_exp, and the
// length follows from volume conservation.

#ifndef DOUGHROLL_SIM_HPP_
#define DOUGHROLL_SIM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "doughroll/common.hpp"
#include "doughroll/config.hpp"
#include "doughroll/force_model.hpp"
#include "doughroll/geometry.hpp"

namespace doughroll {

struct SimConstants {
  double flow_coeff = 0.008;
  // Softer dough flows more per unit overload: rate scales as
  // (flow_ref_stiffness / sigma)^flow_stiffness_exp.
  double flow_ref_stiffness = 0.85;
  double flow_stiffness_exp = 2.5;
  // Yield force per unit stiffness, mm (F_yield = yield_per_stiffness * sigma).
  double yield_per_stiffness = 8.0;
  // Strain hardening: the yield force grows as (hardening_ref_height / h)^m,
  // so thin dough stops responding to the band.
  double hardening_exp = 2.5;
  double hardening_ref_height = 0.02;
  double min_height = 0.004;
  double rounding_exp = 8.0;
  // Relative std of the plastic displacement.
  double process_noise = 0.02;
  double cloud_noise = 0.0005;
  int cloud_points = 1500;
  // Std of a palpation deflection reading, mm (averaged over the contact patch).
  double deflection_noise_mm = 0.05;
  // Maximum gripper throw; also the roll-distance reference.
  double band_max = 0.12;
  double center_pull = 0.2;
  double init_imperfection = 0.05;
  double dough_diameter = 0.04;

  static SimConstants from_config(const KeyValueConfig& cfg,
                                  const std::string& prefix = "sim.") {
    SimConstants c;
    c.flow_coeff = cfg.number_or(prefix + "flow_coeff", c.flow_coeff);
    c.flow_ref_stiffness = cfg.number_or(prefix + "flow_ref_stiffness", c.flow_ref_stiffness);
    c.flow_stiffness_exp = cfg.number_or(prefix + "flow_stiffness_exp", c.flow_stiffness_exp);
    c.yield_per_stiffness =
        cfg.number_or(prefix + "yield_per_stiffness", c.yield_per_stiffness);
    c.hardening_exp = cfg.number_or(prefix + "hardening_exp", c.hardening_exp);
    c.hardening_ref_height =
        cfg.number_or(prefix + "hardening_ref_height", c.hardening_ref_height);
    c.min_height = cfg.number_or(prefix + "min_height", c.min_height);
    c.rounding_exp = cfg.number_or(prefix + "rounding_exp", c.rounding_exp);
    c.process_noise = cfg.number_or(prefix + "process_noise", c.process_noise);
    c.cloud_noise = cfg.number_or(prefix + "cloud_noise", c.cloud_noise);
    c.deflection_noise_mm =
        cfg.number_or(prefix + "deflection_noise_mm", c.deflection_noise_mm);
    c.cloud_points =
        static_cast<int>(cfg.number_or(prefix + "cloud_points", c.cloud_points));
    c.band_max = cfg.number_or(prefix + "band_max", c.band_max);
    c.center_pull = cfg.number_or(prefix + "center_pull", c.center_pull);
    c.init_imperfection = cfg.number_or(prefix + "init_imperfection", c.init_imperfection);
    c.dough_diameter = cfg.number_or(prefix + "dough_diameter", c.dough_diameter);
    return c;
  }

  SimConstants noiseless() const {
    SimConstants c = *this;
    c.process_noise = 0.0;
    c.cloud_noise = 0.0;
    c.deflection_noise_mm = 0.0;
    return c;
  }
};

struct Material {
  std::string name;
  double stiffness = 1.0;  // N/mm
  double hydration_g = 0.0;
  double yield_force = 8.0;  // N

  static Material make(std::string name, double stiffness, double hydration_g,
                       const SimConstants& c = {}) {
    if (!(stiffness > 0.0)) throw Error("material stiffness must be positive");
    return {std::move(name), stiffness, hydration_g, c.yield_per_stiffness * stiffness};
  }
};

// Hydration (g of water per 50 g) and proxy stiffness of the three doughs.
inline Material material_preset(char name, const SimConstants& c = {}) {
  switch (name) {
    case 'A': return Material::make("A", 0.49, 5.0, c);
    case 'B': return Material::make("B", 0.85, 3.0, c);
    case 'C': return Material::make("C", 1.23, 1.0, c);
    default: throw Error(std::string("unknown material preset '") + name + "'");
  }
}

inline Material material_by_name(const std::string& name, const SimConstants& c = {}) {
  if (name.size() != 1) throw Error("unknown material preset '" + name + "'");
  return material_preset(name[0], c);
}

struct LatentDough {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  double center_x = 0.0;
  double center_y = 0.0;
  double volume = 0.0;

  Shape shape() const { return {length, width, height}; }
};

inline double half_ellipsoid_volume(double length, double width, double height) {
  return kPi / 6.0 * length * width * height;
}

inline LatentDough init_dough(double diameter, Rng& rng, double imperfection = 0.05,
                              double center_x = 0.0, double center_y = 0.0) {
  if (!(diameter > 0.0)) throw Error("dough diameter must be positive");
  std::uniform_real_distribution<double> u(-imperfection, imperfection);
  LatentDough d;
  d.length = diameter * (1.0 + u(rng));
  d.width = diameter * (1.0 + u(rng));
  d.height = 0.5 * diameter * (1.0 + u(rng));
  if (d.width > d.length) std::swap(d.width, d.length);
  d.center_x = center_x;
  d.center_y = center_y;
  d.volume = half_ellipsoid_volume(d.length, d.width, d.height);
  return d;
}

inline double effective_yield_force(const Material& m, double height, const SimConstants& c) {
  return m.yield_force * std::pow(c.hardening_ref_height / height, c.hardening_exp);
}

// Plastic height loss for a roll, before process noise.
inline double plastic_displacement(const LatentDough& d, const Material& m,
                                   const RollAction& a, const ForceModel& force,
                                   const SimConstants& c) {
  const double f = predict_force(force, a.band_length, a.depth);
  const double fy = effective_yield_force(m, d.height, c);
  if (!(f > fy)) return 0.0;
  return c.flow_coeff * std::pow(c.flow_ref_stiffness / m.stiffness, c.flow_stiffness_exp) *
         d.height * std::log(f / fy) * (a.band_length / c.band_max);
}

struct StepResult {
  LatentDough dough;
  RollAction applied;
  bool clamped = false;
};

// Applies one roll starting at (roll_x, roll_y); defaults to the dough apex.
inline StepResult step(const LatentDough& dough, const Material& material,
                       const RollAction& action, const ForceModel& force, Rng& rng,
                       const SimConstants& c,
                       std::optional<Point2> roll_at = std::nullopt) {
  StepResult r;
  const ActionBounds bounds = ActionBounds::for_shape(dough.shape(), c.band_max);
  r.applied = bounds.clamp(action);
  r.clamped = !(r.applied == action);

  double dp = plastic_displacement(dough, material, r.applied, force, c);
  if (dp > 0.0 && c.process_noise > 0.0) {
    std::normal_distribution<double> n01(0.0, 1.0);
    dp *= std::max(0.0, 1.0 + c.process_noise * n01(rng));
  }

  LatentDough next = dough;
  if (roll_at) {
    next.center_x += c.center_pull * (roll_at->x - dough.center_x);
    next.center_y += c.center_pull * (roll_at->y - dough.center_y);
  }
  if (dp > 0.0) {
    const double h = std::max(dough.height - dp, std::min(c.min_height, dough.height));
    const double rho = dough.width / dough.height;
    const double rho_next =
        1.0 + (rho - 1.0) * std::pow(h / dough.height, c.rounding_exp);
    next.height = h;
    next.width = rho_next * h;
    next.length = dough.volume / (kPi / 6.0 * next.width * next.height);
    if (next.width > next.length) std::swap(next.width, next.length);
  }
  r.dough = next;
  return r;
}

// Samples the upper half-ellipsoid surface uniformly by area, with isotropic
// Gaussian noise.
inline PointCloud emit_cloud(const LatentDough& d, int n_points, double noise_std,
                             Rng& rng) {
  if (n_points < 100) throw Error("emit_cloud needs at least 100 points");
  const double a = 0.5 * d.length, b = 0.5 * d.width, c = d.height;
  const double bc = b * c, ac = a * c, ab = a * b;
  const double gmax = std::max({bc, ac, ab});
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  PointCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(n_points));
  while (static_cast<int>(cloud.points.size()) < n_points) {
    double x = n01(rng), y = n01(rng), z = n01(rng);
    const double norm = std::sqrt(x * x + y * y + z * z);
    if (norm == 0.0) continue;
    x /= norm;
    y /= norm;
    z = std::abs(z) / norm;
    // Area element of the sphere-to-ellipsoid map, for rejection.
    const double g = std::sqrt(bc * bc * x * x + ac * ac * y * y + ab * ab * z * z);
    if (u01(rng) * gmax > g) continue;
    Point3 p{d.center_x + a * x, d.center_y + b * y, c * z};
    if (noise_std > 0.0) {
      p.x += noise_std * n01(rng);
      p.y += noise_std * n01(rng);
      p.z += noise_std * n01(rng);
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

// Cylinder of volume `volume` and the given length: (length, 2r, 2r).
inline Shape goal_state_for_length(double volume, double goal_length) {
  if (!(goal_length > 0.0)) throw Error("goal length must be positive");
  if (!(volume > 0.0)) throw Error("volume must be positive");
  const double r = std::sqrt(volume / (kPi * goal_length));
  return {goal_length, 2.0 * r, 2.0 * r};
}

// Goal in the observed feature space for dough of half-ellipsoid volume V.
// The features are bounding-box dimensions, and a half-ellipsoid whose box is
// (L, 2r, 2r) holds 2/3 of the cylinder pi r^2 L, so the target cylinder is
// sized to 3V/2.
inline Shape goal_for_dough(double dough_volume, double goal_length) {
  return goal_state_for_length(1.5 * dough_volume, goal_length);
}

// Pre-yield z deflection of the dough under force f, mm.
inline double elastic_deflection_mm(const Material& m, double force) {
  return force / m.stiffness;
}

// One simulated dough on the table, owning its random stream.
class DoughSim {
 public:
  DoughSim(Material material, SimConstants constants, ForceModel force, std::uint64_t seed)
      : material_(std::move(material)), c_(constants), force_(force), rng_(seed) {
    dough_ = init_dough(c_.dough_diameter, rng_, c_.init_imperfection);
  }

  PointCloud observe() { return emit_cloud(dough_, c_.cloud_points, c_.cloud_noise, rng_); }

  StepResult roll(const RollAction& a, std::optional<Point2> at = std::nullopt) {
    StepResult r = step(dough_, material_, a, force_, rng_, c_, at);
    dough_ = r.dough;
    return r;
  }

  // Observed z deflection (mm) for a palpation probe; the camera reads it with
  // its own noise.
  double palpate_deflection_mm(const RollAction& probe) {
    const double f = predict_force(force_, probe.band_length, probe.depth);
    double d = elastic_deflection_mm(material_, f);
    if (c_.deflection_noise_mm > 0.0) {
      std::normal_distribution<double> n01(0.0, 1.0);
      d += c_.deflection_noise_mm * n01(rng_);
    }
    return d;
  }

  void reset() { dough_ = init_dough(c_.dough_diameter, rng_, c_.init_imperfection); }

  const LatentDough& dough() const { return dough_; }
  void set_dough(const LatentDough& d) { dough_ = d; }
  const Material& material() const { return material_; }
  const SimConstants& constants() const { return c_; }
  const ForceModel& force_model() const { return force_; }
  Rng& rng() { return rng_; }

 private:
  Material material_;
  SimConstants c_;
  ForceModel force_;
  Rng rng_;
  LatentDough dough_;
};

}  // namespace doughroll

#endif  // DOUGHROLL_SIM_HPP_
