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

#ifndef DOUGHROLL_STIFFNESS_HPP_
#define DOUGHROLL_STIFFNESS_HPP_

#include <algorithm>
#include <vector>

#include "doughroll/common.hpp"
#include "doughroll/force_model.hpp"
#include "doughroll/sim.hpp"

namespace doughroll {

struct StiffnessEstimate {
  double sigma = 0.0;            // N/mm
  double deflection_used = 0.0;  // mm
  double force_used = 0.0;       // N
  RollAction probe;
};

// Smallest deflection the overhead camera resolves, mm.
inline constexpr double kObservableDeflectionMm = 1.0;

// Depths 2, 4, 6, 8 mm at 4/5 of the maximum throw, shallowest first.
inline std::vector<RollAction> default_probe_schedule(double band_max) {
  std::vector<RollAction> probes;
  for (double d_mm : {2.0, 4.0, 6.0, 8.0}) probes.push_back({0.8 * band_max, d_mm / 1000.0});
  return probes;
}

// Presses with each probe in turn; the first one that produces an observable
// deflection gives sigma = predicted force / deflection.
inline StiffnessEstimate palpate_and_estimate(DoughSim& sim, const ForceModel& calibrated,
                                              std::span<const RollAction> schedule) {
  for (const auto& probe : schedule) {
    const double deflection = sim.palpate_deflection_mm(probe);
    if (deflection >= kObservableDeflectionMm) {
      StiffnessEstimate e;
      e.force_used = predict_force(calibrated, probe.band_length, probe.depth);
      e.deflection_used = deflection;
      e.sigma = e.force_used / deflection;
      e.probe = probe;
      if (!(e.sigma > 0.0)) throw EstimationFailedError("non-positive stiffness estimate");
      return e;
    }
  }
  throw EstimationFailedError("no observable deflection across the probe schedule");
}

// Interpolation weight between the hydrated (soft) and dry (stiff) models,
// clamped to [0, 1].
inline double blend_coefficient(double sigma_unknown, double sigma_hydrated,
                                double sigma_dry) {
  if (!(sigma_dry > sigma_hydrated)) {
    throw Error("dry stiffness must exceed hydrated stiffness");
  }
  return std::clamp((sigma_unknown - sigma_hydrated) / (sigma_dry - sigma_hydrated), 0.0,
                    1.0);
}

}  // namespace doughroll

#endif  // DOUGHROLL_STIFFNESS_HPP_
