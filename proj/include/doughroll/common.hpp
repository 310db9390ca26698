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

#ifndef DOUGHROLL_COMMON_HPP_
#define DOUGHROLL_COMMON_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>

namespace doughroll {

// All lengths are meters unless a name says otherwise.
inline constexpr double kMetersPerInch = 0.0254;
inline constexpr double kPi = 3.14159265358979323846;

// Lower bound on press depth; guarantees contact on every roll.
inline constexpr double kMinPressDepth = 0.005;

using Rng = std::mt19937_64;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Featurization found nothing usable above the table.
class NoDoughError : public Error {
 public:
  using Error::Error;
};

class DegenerateHullError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class EstimationFailedError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

// Bulk dough shape (length, width, height).
struct Shape {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;

  std::array<double, 3> as_array() const { return {length, width, height}; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline double distance(const Shape& a, const Shape& b) {
  const double dl = a.length - b.length;
  const double dw = a.width - b.width;
  const double dh = a.height - b.height;
  return std::sqrt(dl * dl + dw * dw + dh * dh);
}

// Effective two-dimensional roll: band length (gripper throw) and press depth.
struct RollAction {
  double band_length = 0.0;
  double depth = 0.0;
  friend bool operator==(const RollAction&, const RollAction&) = default;
};

// Admissible action box for a given observed shape. The band must cover the
// width and the press cannot exceed the height; when an interval collapses
// the lower bound wins.
struct ActionBounds {
  double band_min = 0.0;
  double band_max = 0.0;
  double depth_min = kMinPressDepth;
  double depth_max = kMinPressDepth;

  static ActionBounds for_shape(const Shape& s, double band_max) {
    ActionBounds b;
    b.band_max = band_max;
    b.band_min = std::min(s.width, band_max);
    b.depth_min = kMinPressDepth;
    b.depth_max = std::max(s.height, kMinPressDepth);
    return b;
  }

  RollAction clamp(const RollAction& a) const {
    return {std::clamp(a.band_length, band_min, band_max),
            std::clamp(a.depth, depth_min, depth_max)};
  }

  bool contains(const RollAction& a, double tol = 1e-12) const {
    return a.band_length >= band_min - tol && a.band_length <= band_max + tol &&
           a.depth >= depth_min - tol && a.depth <= depth_max + tol;
  }
};

}  // namespace doughroll

#endif  // DOUGHROLL_COMMON_HPP_
