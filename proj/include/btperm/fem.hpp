// SPDX-License-Identifier: Apache-2.0
#pragma once

// P1 operators on per-tet duplicated degrees of freedom. Every tetrahedron is
// an independent compartment: DOF (tet, local vertex) -> 4*tet + local, and no
// DOF is shared across tets. Mass, stiffness and the coordinate-weighted
// dephasing matrices are therefore block diagonal; only the interface
// coupling (coupling.hpp) connects compartments.

#include <array>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "btperm/common.hpp"
#include "btperm/mesh.hpp"

namespace btperm {

using SpMat = Eigen::SparseMatrix<double>;

struct DofMap {
  int n_tets = 0;
  int n_dofs() const { return 4 * n_tets; }
  int dof(int tet, int local) const { return 4 * tet + local; }
};

inline DofMap make_dof_map(const Mesh& mesh) { return DofMap{mesh.n_tets()}; }

namespace detail {

// Gradients of the four barycentric basis functions (constant per tet).
inline std::array<Eigen::Vector3d, 4> p1_gradients(const Eigen::Vector3d& a,
                                                   const Eigen::Vector3d& b,
                                                   const Eigen::Vector3d& c,
                                                   const Eigen::Vector3d& d) {
  Eigen::Matrix3d J;
  J.col(0) = b - a;
  J.col(1) = c - a;
  J.col(2) = d - a;
  const Eigen::Matrix3d Jit = J.inverse().transpose();
  std::array<Eigen::Vector3d, 4> g;
  g[1] = Jit.col(0);
  g[2] = Jit.col(1);
  g[3] = Jit.col(2);
  g[0] = -(g[1] + g[2] + g[3]);
  return g;
}

} // namespace detail

// Consistent P1 mass: local block (V/20) * (1 + delta_ij).
inline SpMat assemble_mass(const Mesh& mesh, const DofMap& dofs) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.n_tets()) * 16);
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const double v = mesh.tet_volume(t);
    if (v <= 1e-12) throw NumericalError("degenerate tet in mass assembly");
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        trips.emplace_back(dofs.dof(t, i), dofs.dof(t, j), v / 20.0 * (i == j ? 2.0 : 1.0));
  }
  SpMat m(dofs.n_dofs(), dofs.n_dofs());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

// Stiffness scaled by the isotropic diffusivity: K_ij = D * V * grad_i . grad_j.
inline SpMat assemble_stiffness(const Mesh& mesh, const DofMap& dofs, double diffusivity) {
  if (!(diffusivity > 0.0)) throw ConfigError("diffusivity must be positive");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.n_tets()) * 16);
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const double v = mesh.tet_volume(t);
    if (v <= 1e-12) throw NumericalError("degenerate tet in stiffness assembly");
    const auto& tet = mesh.tets()[t];
    const auto g = detail::p1_gradients(mesh.vertices()[tet[0]], mesh.vertices()[tet[1]],
                                        mesh.vertices()[tet[2]], mesh.vertices()[tet[3]]);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        trips.emplace_back(dofs.dof(t, i), dofs.dof(t, j), diffusivity * v * g[i].dot(g[j]));
  }
  SpMat k(dofs.n_dofs(), dofs.n_dofs());
  k.setFromTriplets(trips.begin(), trips.end());
  return k;
}

// Coordinate-weighted mass matrices: (J_c)_ij = int phi_i phi_j x_c. With
// x_c = sum_m lambda_m p_mc this reduces to exact monomial integrals
// int lambda_i lambda_j lambda_m = V/120, V/60 or V/20 by multiplicity.
inline std::array<SpMat, 3> assemble_dephasing(const Mesh& mesh, const DofMap& dofs) {
  std::array<std::vector<Eigen::Triplet<double>>, 3> trips;
  for (auto& tr : trips) tr.reserve(static_cast<std::size_t>(mesh.n_tets()) * 16);
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const double v = mesh.tet_volume(t);
    const auto& tet = mesh.tets()[t];
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        Eigen::Vector3d entry = Eigen::Vector3d::Zero();
        for (int m = 0; m < 4; ++m) {
          double w;
          if (i == j && j == m) w = v / 20.0;
          else if (i == j || j == m || i == m) w = v / 60.0;
          else w = v / 120.0;
          entry += w * mesh.vertices()[tet[m]];
        }
        for (int c = 0; c < 3; ++c)
          trips[c].emplace_back(dofs.dof(t, i), dofs.dof(t, j), entry[c]);
      }
    }
  }
  std::array<SpMat, 3> j;
  for (int c = 0; c < 3; ++c) {
    j[c] = SpMat(dofs.n_dofs(), dofs.n_dofs());
    j[c].setFromTriplets(trips[c].begin(), trips[c].end());
  }
  return j;
}

// R = M / T2; the zero matrix when T2 is infinite.
inline SpMat assemble_relaxation(const SpMat& mass, double t2) {
  if (!(t2 > 0.0)) throw ConfigError("T2 must be positive (or infinite)");
  if (std::isinf(t2)) return SpMat(mass.rows(), mass.cols());
  return SpMat(mass / t2);
}

struct OperatorSet {
  DofMap dofs;
  SpMat mass;
  SpMat stiffness;
  SpMat relaxation;
  std::array<SpMat, 3> dephasing;
  double inv_t2 = 0.0;
  double total_volume = 0.0;
};

inline OperatorSet assemble_operators(const Mesh& mesh, double diffusivity,
                                      double t2 = units::kInfiniteT2) {
  OperatorSet ops;
  ops.dofs = make_dof_map(mesh);
  ops.mass = assemble_mass(mesh, ops.dofs);
  ops.stiffness = assemble_stiffness(mesh, ops.dofs, diffusivity);
  ops.relaxation = assemble_relaxation(ops.mass, t2);
  ops.dephasing = assemble_dephasing(mesh, ops.dofs);
  ops.inv_t2 = std::isinf(t2) ? 0.0 : 1.0 / t2;
  ops.total_volume = mesh.total_volume();
  return ops;
}

} // namespace btperm
