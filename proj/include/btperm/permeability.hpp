// SPDX-License-Identifier: Apache-2.0
#pragma once

// Face permeability field with the tempered-sigmoid reparametrization in
// log10 space: k(theta) = k_min + (k_max - k_min) * sigmoid(theta / tau),
// kappa = 10^k. Unconstrained theta is what the optimizer owns; kappa is the
// physical value in mm/ms.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "btperm/common.hpp"
#include "btperm/mesh.hpp"
#include "btperm/shapes.hpp"

namespace btperm {

struct SigmoidReparam {
  double k_min = -5.0;
  double k_max = -1.0;
  double tau_sigma = 1.0;

  double log10_kappa(double theta) const {
    return k_min + (k_max - k_min) * sigmoid(theta / tau_sigma);
  }
  double kappa(double theta) const { return std::pow(10.0, log10_kappa(theta)); }

  // dk/dtheta and dkappa/dtheta in closed form.
  double dlog10_dtheta(double theta) const {
    return (k_max - k_min) * sigmoid_deriv(theta / tau_sigma) / tau_sigma;
  }
  double dkappa_dtheta(double theta) const {
    return kappa(theta) * std::numbers::ln10 * dlog10_dtheta(theta);
  }

  // Inverse map, clamped so thetas stay finite at the range endpoints.
  double theta_from_kappa(double kappa_value) const {
    const double u = (std::log10(kappa_value) - k_min) / (k_max - k_min);
    return tau_sigma * logit_clamped(u);
  }
};

struct PermeabilityField {
  Eigen::VectorXd theta;
  Eigen::VectorXd kappa; // mm/ms, strictly inside (10^k_min, 10^k_max)
  SigmoidReparam reparam;

  int n_faces() const { return static_cast<int>(kappa.size()); }

  static PermeabilityField from_theta(Eigen::VectorXd theta_values,
                                      const SigmoidReparam& reparam = {}) {
    PermeabilityField f;
    f.reparam = reparam;
    f.theta = std::move(theta_values);
    f.kappa.resize(f.theta.size());
    for (Eigen::Index i = 0; i < f.theta.size(); ++i)
      f.kappa[i] = reparam.kappa(f.theta[i]);
    return f;
  }

  // Keeps the given kappas exactly; thetas are the clamped inverse images.
  static PermeabilityField from_kappa(Eigen::VectorXd kappa_values,
                                      const SigmoidReparam& reparam = {}) {
    PermeabilityField f;
    f.reparam = reparam;
    f.kappa = std::move(kappa_values);
    f.theta.resize(f.kappa.size());
    for (Eigen::Index i = 0; i < f.kappa.size(); ++i)
      f.theta[i] = reparam.theta_from_kappa(f.kappa[i]);
    return f;
  }

  // Internal-unit coupling coefficients (um/ms) for operator assembly.
  Eigen::VectorXd kappa_internal() const { return kappa * units::kKappaToUmPerMs; }
};

struct InterfaceSet {
  std::vector<int> faces; // ascending interior-face indices
  double threshold = 1e-3;
};

// Barrier set: faces with kappa strictly below tau_b, so a field sitting
// exactly at the threshold yields an empty set.
inline InterfaceSet extract_interface(const PermeabilityField& field, double tau_b) {
  const double lo = std::pow(10.0, field.reparam.k_min);
  const double hi = std::pow(10.0, field.reparam.k_max);
  if (!(tau_b > lo && tau_b < hi))
    throw ConfigError("interface threshold outside the permeability range");
  InterfaceSet set;
  set.threshold = tau_b;
  for (int f = 0; f < field.n_faces(); ++f)
    if (field.kappa[f] < tau_b) set.faces.push_back(f);
  return set;
}

// Reference field for a phantom: classify tets by the sign of the SDF at the
// centroid; faces straddling the level set get kappa_barrier, others
// kappa_open.
inline PermeabilityField generate_ground_truth(const Mesh& mesh, const ShapeSpec& shape,
                                               double kappa_barrier = 1e-5,
                                               double kappa_open = 1e-1,
                                               const SigmoidReparam& reparam = {}) {
  double half_extent = 0.0;
  for (const auto& v : mesh.vertices())
    half_extent = std::max(half_extent, v.cwiseAbs().maxCoeff());
  shape.validate(half_extent);

  std::vector<char> tet_inside(mesh.n_tets());
  for (int t = 0; t < mesh.n_tets(); ++t)
    tet_inside[t] = shape.inside(mesh.tet_centroid(t)) ? 1 : 0;

  Eigen::VectorXd kappa(mesh.n_interior_faces());
  for (int f = 0; f < mesh.n_interior_faces(); ++f) {
    const auto& face = mesh.interior_faces()[f];
    const bool straddles = tet_inside[face.tet_a] != tet_inside[face.tet_b];
    kappa[f] = straddles ? kappa_barrier : kappa_open;
  }
  return PermeabilityField::from_kappa(std::move(kappa), reparam);
}

} // namespace btperm
