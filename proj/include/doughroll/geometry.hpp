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

// Point cloud featurization: the dough surface cloud is reduced to the
// minimum-area bounding rectangle of its table projection, the height of its
// highest point and that point's planar position.

#ifndef DOUGHROLL_GEOMETRY_HPP_
#define DOUGHROLL_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "doughroll/common.hpp"

namespace doughroll {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Surface samples in the workspace frame, z = 0 on the table.
struct PointCloud {
  std::vector<Point3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Observed state. length >= width by convention.
struct DoughState {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  double x_high = 0.0;
  double y_high = 0.0;

  Shape shape() const { return {length, width, height}; }
};

struct Rectangle {
  double length = 0.0;
  double width = 0.0;
  // Orientation of the length axis, radians in [0, pi).
  double angle = 0.0;
  Point2 center;

  double area() const { return length * width; }
};

namespace detail {

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace detail

// Andrew's monotone chain. Returns the hull counter-clockwise without
// collinear boundary points, starting from the lexicographically smallest
// vertex.
inline std::vector<Point2> convex_hull_2d(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) {
    throw DegenerateHullError("convex hull needs at least 3 distinct points");
  }

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower && detail::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) {
      --k;
    }
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) {
    throw DegenerateHullError("all points are collinear");
  }
  return hull;
}

inline double polygon_area(std::span<const Point2> poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

// Bounding rectangle of `points` with one side along direction `angle`.
inline Rectangle bounding_rect_at(std::span<const Point2> points, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  double umin = std::numeric_limits<double>::infinity(), umax = -umin;
  double vmin = umin, vmax = -umin;
  for (const auto& p : points) {
    const double u = c * p.x + s * p.y;
    const double v = -s * p.x + c * p.y;
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const double du = umax - umin;
  const double dv = vmax - vmin;
  const double uc = 0.5 * (umin + umax);
  const double vc = 0.5 * (vmin + vmax);

  Rectangle r;
  r.center = {c * uc - s * vc, s * uc + c * vc};
  if (du >= dv) {
    r.length = du;
    r.width = dv;
    r.angle = angle;
  } else {
    r.length = dv;
    r.width = du;
    r.angle = angle + kPi / 2;
  }
  r.angle = std::fmod(r.angle, kPi);
  if (r.angle < 0) r.angle += kPi;
  return r;
}

// Rotating calipers: the optimal rectangle has a side collinear with a hull
// edge, so only edge directions (folded into [0, pi/2)) are candidates. Among
// equal areas the smallest folded direction wins.
inline Rectangle min_area_rect(std::span<const Point2> hull) {
  if (hull.size() < 3 || std::abs(polygon_area(hull)) <= 0.0) {
    throw DegenerateHullError("minimum-area rectangle needs a non-degenerate hull");
  }
  constexpr double kTieTol = 1e-12;
  Rectangle best;
  double best_dir = 0.0;
  bool have = false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    double dir = std::atan2(b.y - a.y, b.x - a.x);
    dir = std::fmod(dir, kPi / 2);
    if (dir < 0) dir += kPi / 2;
    if (dir >= kPi / 2) dir = 0.0;
    const Rectangle r = bounding_rect_at(hull, dir);
    const double area = r.area();
    const double scale = have ? std::max(best.area(), area) : area;
    if (!have || area < best.area() - kTieTol * scale ||
        (std::abs(area - best.area()) <= kTieTol * scale && dir < best_dir)) {
      best = r;
      best_dir = dir;
      have = true;
    }
  }
  return best;
}

struct FeaturizeOptions {
  // Points at or below table_z + margin are treated as table.
  double table_margin = 0.002;
};

inline DoughState featurize(const PointCloud& cloud, double table_z,
                            const FeaturizeOptions& opts = {}) {
  const double cutoff = table_z + opts.table_margin;
  std::vector<Point2> planar;
  planar.reserve(cloud.size());
  const Point3* top = nullptr;
  for (const auto& p : cloud.points) {
    if (!(p.z > cutoff)) continue;
    planar.push_back({p.x, p.y});
    if (top == nullptr || p.z > top->z ||
        (p.z == top->z && (p.x < top->x || (p.x == top->x && p.y < top->y)))) {
      top = &p;
    }
  }
  if (top == nullptr) {
    throw NoDoughError("no points above the table");
  }

  Rectangle rect;
  try {
    const auto hull = convex_hull_2d(planar);
    rect = min_area_rect(hull);
  } catch (const DegenerateHullError& e) {
    throw NoDoughError(std::string("degenerate dough footprint: ") + e.what());
  }

  DoughState s;
  s.length = rect.length;
  s.width = rect.width;
  s.height = top->z - table_z;
  s.x_high = top->x;
  s.y_high = top->y;
  return s;
}

// Whitespace-delimited "x y z" per line; blank lines and '#' comments are
// skipped.
inline PointCloud read_point_cloud(std::istream& in) {
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    Point3 p;
    std::string extra;
    if (!(ss >> p.x >> p.y >> p.z) || (ss >> extra)) {
      throw ParseError(lineno, "expected three numbers \"x y z\"");
    }
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw ParseError(lineno, "non-finite coordinate");
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

inline void write_point_cloud(std::ostream& out, const PointCloud& cloud) {
  const auto old = out.precision(17);
  for (const auto& p : cloud.points) {
    out << p.x << ' ' << p.y << ' ' << p.z << '\n';
  }
  out.precision(old);
}

}  // namespace doughroll

#endif  // DOUGHROLL_GEOMETRY_HPP_
