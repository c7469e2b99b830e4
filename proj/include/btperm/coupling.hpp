// SPDX-License-Identifier: Apache-2.0
#pragma once

// Robin interface coupling B(kappa) = sum_f kappa_f * B_f over all interior
// faces. For face f with area A and triangle mass S_f = (A/12)[[2,1,1],[1,2,1],
// [1,1,2]], B_f carries +S_f on each side's own face DOFs and -S_f across,
// pairing geometrically coincident vertices, i.e. x^T B_f y =
// (x_a - x_b)^T S_f (y_a - y_b). All products below use that difference form,
// so B(kappa) * 1 vanishes exactly and the per-face reduced projections come
// out as rank-3 updates.
//
// kappa here is in internal units (um/ms); see PermeabilityField::kappa_internal.

#include <array>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "btperm/common.hpp"
#include "btperm/fem.hpp"
#include "btperm/mesh.hpp"

namespace btperm {

struct FaceCoupling {
  std::array<int, 3> dofs_a{};
  std::array<int, 3> dofs_b{}; // dofs_b[i] sits at the same vertex as dofs_a[i]
  Eigen::Matrix3d face_mass;   // S_f, area-weighted triangle mass
};

class CouplingStructure {
 public:
  std::vector<FaceCoupling> faces;
  int n_dofs = 0;

  int n_faces() const { return static_cast<int>(faces.size()); }

  // y = B(kappa) x.
  Eigen::VectorXd apply(const Eigen::VectorXd& kappa, const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n_dofs);
    for (int f = 0; f < n_faces(); ++f) {
      const auto& fc = faces[f];
      Eigen::Vector3d diff;
      for (int i = 0; i < 3; ++i) diff[i] = x[fc.dofs_a[i]] - x[fc.dofs_b[i]];
      const Eigen::Vector3d flux = kappa[f] * (fc.face_mass * diff);
      for (int i = 0; i < 3; ++i) {
        y[fc.dofs_a[i]] += flux[i];
        y[fc.dofs_b[i]] -= flux[i];
      }
    }
    return y;
  }

  SpMat assemble(const Eigen::VectorXd& kappa) const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(faces.size() * 36);
    for (int f = 0; f < n_faces(); ++f) {
      const auto& fc = faces[f];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          const double s = kappa[f] * fc.face_mass(i, j);
          trips.emplace_back(fc.dofs_a[i], fc.dofs_a[j], s);
          trips.emplace_back(fc.dofs_b[i], fc.dofs_b[j], s);
          trips.emplace_back(fc.dofs_a[i], fc.dofs_b[j], -s);
          trips.emplace_back(fc.dofs_b[i], fc.dofs_a[j], -s);
        }
      }
    }
    SpMat b(n_dofs, n_dofs);
    b.setFromTriplets(trips.begin(), trips.end());
    return b;
  }

  // U^T B(kappa) U = sum_f kappa_f * Z_f^T S_f Z_f with Z_f = U_a - U_b.
  Eigen::MatrixXd project(const Eigen::MatrixXd& basis, const Eigen::VectorXd& kappa) const {
    const Eigen::Index m = basis.cols();
    Eigen::MatrixXd reduced = Eigen::MatrixXd::Zero(m, m);
    Eigen::Matrix<double, 3, Eigen::Dynamic> z(3, m);
    for (int f = 0; f < n_faces(); ++f) {
      const auto& fc = faces[f];
      for (int i = 0; i < 3; ++i)
        z.row(i) = basis.row(fc.dofs_a[i]) - basis.row(fc.dofs_b[i]);
      reduced.noalias() += kappa[f] * (z.transpose() * (fc.face_mass * z));
    }
    return reduced;
  }

  // Per-face contraction d<Gbar, U^T B U>/dkappa_f = <Gbar, Z_f^T S_f Z_f>.
  Eigen::VectorXd gradient_contract(const Eigen::MatrixXd& basis,
                                    const Eigen::MatrixXd& gbar) const {
    const Eigen::Index m = basis.cols();
    const Eigen::MatrixXd gsym = 0.5 * (gbar + gbar.transpose());
    Eigen::VectorXd grad(n_faces());
    Eigen::Matrix<double, 3, Eigen::Dynamic> z(3, m), w(3, m), sz(3, m);
    for (int f = 0; f < n_faces(); ++f) {
      const auto& fc = faces[f];
      for (int i = 0; i < 3; ++i)
        z.row(i) = basis.row(fc.dofs_a[i]) - basis.row(fc.dofs_b[i]);
      w.noalias() = z * gsym;
      sz.noalias() = fc.face_mass * z;
      grad[f] = (sz.array() * w.array()).sum();
    }
    return grad;
  }
};

inline CouplingStructure build_coupling_structure(const Mesh& mesh, const DofMap& dofs,
                                                  double pairing_tol = 1e-9) {
  CouplingStructure cs;
  cs.n_dofs = dofs.n_dofs();
  cs.faces.reserve(mesh.n_interior_faces());
  for (int fi = 0; fi < mesh.n_interior_faces(); ++fi) {
    const auto& face = mesh.interior_faces()[fi];
    FaceCoupling fc;
    const auto& tet_a = mesh.tets()[face.tet_a];
    const auto& tet_b = mesh.tets()[face.tet_b];
    for (int i = 0; i < 3; ++i) {
      const int v = face.verts[i];
      int la = -1, lb = -1;
      for (int l = 0; l < 4; ++l) {
        if (tet_a[l] == v) la = l;
        if (tet_b[l] == v) lb = l;
      }
      if (la < 0 || lb < 0 ||
          (mesh.vertices()[tet_a[la]] - mesh.vertices()[tet_b[lb]]).norm() > pairing_tol)
        throw MeshError("interior face vertex correspondence failed");
      fc.dofs_a[i] = dofs.dof(face.tet_a, la);
      fc.dofs_b[i] = dofs.dof(face.tet_b, lb);
    }
    const double area = mesh.face_area(fi);
    fc.face_mass = area / 12.0 * (Eigen::Matrix3d::Ones() + Eigen::Matrix3d::Identity());
    cs.faces.push_back(fc);
  }
  return cs;
}

} // namespace btperm
