// SPDX-License-Identifier: Apache-2.0
#pragma once

// Implicit phantom shapes. A tet is "inside" when the signed distance at its
// centroid is negative; ground-truth barrier faces are the interior faces
// whose two tets get opposite classifications.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "btperm/common.hpp"

namespace btperm {

enum class ShapeKind { Sphere, Cylinder, BentCylinder, Torus, Union };

struct ShapeSpec {
  ShapeKind kind = ShapeKind::Sphere;

  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;                  // sphere/cylinder/bent/torus tube radius
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ(); // torus axis
  Eigen::Vector3d p0 = Eigen::Vector3d::Zero();    // cylinder segment
  Eigen::Vector3d p1 = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector3d> points;  // bent-cylinder polyline
  double major_radius = 0.0;            // torus ring radius
  std::vector<ShapeSpec> members;       // union

  double sdf(const Eigen::Vector3d& p) const;
  bool inside(const Eigen::Vector3d& p) const { return sdf(p) < 0.0; }

  // Rejects degenerate shapes (zero radius, empty polyline/union) and shapes
  // whose core lies outside the cube. Tube shapes may span the full domain.
  void validate(double half_extent) const;
};

namespace detail {

inline double point_segment_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                     const Eigen::Vector3d& b) {
  const Eigen::Vector3d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

} // namespace detail

inline double ShapeSpec::sdf(const Eigen::Vector3d& p) const {
  switch (kind) {
    case ShapeKind::Sphere:
      return (p - center).norm() - radius;
    case ShapeKind::Cylinder:
      return detail::point_segment_distance(p, p0, p1) - radius;
    case ShapeKind::BentCylinder: {
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i + 1 < points.size(); ++i)
        d = std::min(d, detail::point_segment_distance(p, points[i], points[i + 1]));
      return d - radius;
    }
    case ShapeKind::Torus: {
      const Eigen::Vector3d w = axis.normalized();
      const Eigen::Vector3d q = p - center;
      const double z = q.dot(w);
      const double rho = (q - z * w).norm();
      return std::sqrt((rho - major_radius) * (rho - major_radius) + z * z) - radius;
    }
    case ShapeKind::Union: {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& s : members) d = std::min(d, s.sdf(p));
      return d;
    }
  }
  throw ConfigError("unknown shape kind");
}

inline void ShapeSpec::validate(double half_extent) const {
  auto in_cube = [half_extent](const Eigen::Vector3d& p) {
    return p.cwiseAbs().maxCoeff() <= half_extent;
  };
  switch (kind) {
    case ShapeKind::Sphere:
      if (!(radius > 0.0)) throw ConfigError("sphere: radius must be positive");
      if (!in_cube(center) || (center.cwiseAbs().maxCoeff() + radius) > half_extent)
        throw ConfigError("sphere: does not fit inside the domain");
      break;
    case ShapeKind::Cylinder:
      if (!(radius > 0.0)) throw ConfigError("cylinder: radius must be positive");
      if (radius >= half_extent) throw ConfigError("cylinder: radius too large for domain");
      break;
    case ShapeKind::BentCylinder:
      if (!(radius > 0.0)) throw ConfigError("bent cylinder: radius must be positive");
      if (points.size() < 2) throw ConfigError("bent cylinder: needs at least 2 points");
      break;
    case ShapeKind::Torus:
      if (!(radius > 0.0) || !(major_radius > 0.0))
        throw ConfigError("torus: radii must be positive");
      if (axis.norm() <= 0.0) throw ConfigError("torus: zero axis");
      if (!in_cube(center) ||
          (center.cwiseAbs().maxCoeff() + major_radius + radius) > half_extent)
        throw ConfigError("torus: does not fit inside the domain");
      break;
    case ShapeKind::Union:
      if (members.empty()) throw ConfigError("union: no member shapes");
      for (const auto& s : members) s.validate(half_extent);
      break;
  }
}

inline ShapeKind shape_kind_from_string(const std::string& s) {
  if (s == "sphere") return ShapeKind::Sphere;
  if (s == "cylinder") return ShapeKind::Cylinder;
  if (s == "bent_cylinder") return ShapeKind::BentCylinder;
  if (s == "torus") return ShapeKind::Torus;
  if (s == "union") return ShapeKind::Union;
  throw ConfigError("unknown shape kind: " + s);
}

} // namespace btperm
