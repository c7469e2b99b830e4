// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reduced-order propagation: project the semi-discrete system onto the lowest
// generalized eigenpairs of (K + B(kappa)) u = lambda M u, then step each
// constant-gradient interval with a dense matrix exponential
//   y <- exp(-h (C + i gamma (g . Jred))) y,   C = U^T(K + B)U + I/T2,
// and read out S = (1^T M U) y(TE). Between full eigensolves only the reduced
// coupling U^T B(kappa) U is refreshed (the basis stays fixed), so kappa
// updates act immediately through the symmetric reduced operator.

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "btperm/common.hpp"
#include "btperm/coupling.hpp"
#include "btperm/eigensolve.hpp"
#include "btperm/encoding.hpp"
#include "btperm/expm.hpp"
#include "btperm/fem.hpp"
#include "btperm/permeability.hpp"

namespace btperm {

struct ReducedModel {
  Eigen::MatrixXd basis;       // n_dofs x m, M-orthonormal
  Eigen::VectorXd eigenvalues; // from the last full eigensolve
  Eigen::MatrixXd red_stiffness;
  std::array<Eigen::MatrixXd, 3> red_dephasing;
  Eigen::MatrixXd red_coupling;
  Eigen::VectorXd readout;     // U^T M 1
  double inv_t2 = 0.0;
  double total_volume = 0.0;
  int staleness = 0;           // coupling-only refreshes since the eigensolve

  // Eigendecomposition of C = red_stiffness + red_coupling + inv_t2 * I,
  // reused for the zero-gradient intervals and their Frechet derivatives.
  Eigen::MatrixXd sym_vecs;
  Eigen::VectorXd sym_vals;

  int dim() const { return static_cast<int>(readout.size()); }

  Eigen::MatrixXd symmetric_operator() const {
    Eigen::MatrixXd c = red_stiffness + red_coupling;
    c.diagonal().array() += inv_t2;
    return c;
  }

  void rebuild_sym_cache() {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric_operator());
    if (es.info() != Eigen::Success)
      throw NumericalError("reduced operator eigendecomposition failed");
    sym_vecs = es.eigenvectors();
    sym_vals = es.eigenvalues();
  }
};

inline ReducedModel compute_reduced_basis(const OperatorSet& ops,
                                          const CouplingStructure& coupling,
                                          const PermeabilityField& field, int neig,
                                          const EigOptions& eig_opts = {}) {
  if (neig > ops.dofs.n_dofs())
    throw ConfigError("neig exceeds the number of degrees of freedom");
  const Eigen::VectorXd kappa_int = field.kappa_internal();
  const SpMat a = ops.stiffness + coupling.assemble(kappa_int);
  EigResult eig = solve_lowest_generalized(a, ops.mass, neig, eig_opts);
  if (eig.values[0] < -1e-10)
    throw NumericalError("reduced operator is not positive semidefinite");

  ReducedModel model;
  model.basis = std::move(eig.vectors);
  model.eigenvalues = std::move(eig.values);
  Eigen::MatrixXd ku = ops.stiffness * model.basis;
  Eigen::MatrixXd red_k = model.basis.transpose() * ku;
  model.red_stiffness = 0.5 * (red_k + red_k.transpose());
  for (int c = 0; c < 3; ++c) {
    Eigen::MatrixXd ju = ops.dephasing[c] * model.basis;
    Eigen::MatrixXd red_j = model.basis.transpose() * ju;
    model.red_dephasing[c] = 0.5 * (red_j + red_j.transpose());
  }
  model.readout = model.basis.transpose() *
                  (ops.mass * Eigen::VectorXd::Ones(ops.dofs.n_dofs()));
  model.red_coupling = coupling.project(model.basis, kappa_int);
  model.inv_t2 = ops.inv_t2;
  model.total_volume = ops.total_volume;
  model.staleness = 0;
  model.rebuild_sym_cache();
  return model;
}

inline void refresh_coupling(ReducedModel& model, const CouplingStructure& coupling,
                             const PermeabilityField& field) {
  model.red_coupling = coupling.project(model.basis, field.kappa_internal());
  ++model.staleness;
  model.rebuild_sym_cache();
}

// Full eigensolve on iterations that are multiples of the refresh interval,
// coupling-only refresh otherwise.
inline void maybe_refresh_basis(ReducedModel& model, long iteration, int refresh_interval,
                                const OperatorSet& ops, const CouplingStructure& coupling,
                                const PermeabilityField& field, int neig,
                                const EigOptions& eig_opts = {}) {
  if (refresh_interval < 1) throw ConfigError("refresh interval must be >= 1");
  if (iteration % refresh_interval == 0)
    model = compute_reduced_basis(ops, coupling, field, neig, eig_opts);
  else
    refresh_coupling(model, coupling, field);
}

namespace detail {

inline CMat interval_generator(const ReducedModel& model, const Eigen::MatrixXd& sym_op,
                               const Eigen::Vector3d& amplitude) {
  Eigen::MatrixXd dephase = units::kGyromagneticRatio *
                            (amplitude.x() * model.red_dephasing[0] +
                             amplitude.y() * model.red_dephasing[1] +
                             amplitude.z() * model.red_dephasing[2]);
  return sym_op.cast<Complex>() + Complex(0.0, 1.0) * dephase.cast<Complex>();
}

} // namespace detail

// Complex signal S_a = readout^T y(TE) for one acquisition.
inline Complex propagate(const ReducedModel& model, const Acquisition& acq, double rho = 1.0) {
  const auto intervals = waveform_intervals(acq);
  CVec y = (rho * model.readout).cast<Complex>();

  const Eigen::MatrixXd sym_op = model.symmetric_operator();
  CMat first_lobe;          // exp for the leading gradient lobe
  Eigen::Vector3d first_amp = Eigen::Vector3d::Zero();
  double first_h = -1.0;

  for (const auto& iv : intervals) {
    const double h = iv.duration();
    if (h < 0.0) throw NumericalError("negative interval duration");
    if (h == 0.0) continue;
    if (iv.amplitude.isZero(0.0)) {
      y = sym_exp_apply(model.sym_vecs, (-h) * model.sym_vals, y);
    } else if (first_h == h && (iv.amplitude + first_amp).isZero(0.0)) {
      // Opposite-polarity lobe of equal duration: exp(-h conj(A)) = conj(exp(-h A)).
      y = first_lobe.conjugate() * y;
    } else {
      const CMat gen = detail::interval_generator(model, sym_op, iv.amplitude);
      CMat e = expm((-h) * gen);
      y = e * y;
      first_lobe = std::move(e);
      first_amp = iv.amplitude;
      first_h = h;
    }
  }
  // readout is real, so dot (conjugate-linear in the first slot) gives r^T y.
  return model.readout.cast<Complex>().dot(y);
}

struct SignalSet {
  std::vector<Complex> signals; // aligned with protocol order

  Complex s0_for(const Protocol& protocol, int acq_index) const {
    return signals[protocol.b0_index_for(acq_index)];
  }
};

inline SignalSet simulate_protocol(const ReducedModel& model, const Protocol& protocol,
                                   double rho = 1.0, int workers = 1) {
  SignalSet set;
  set.signals.resize(protocol.size());
  parallel_for(static_cast<std::size_t>(protocol.size()), workers, [&](std::size_t i) {
    set.signals[i] = propagate(model, protocol.acquisitions[i], rho);
  });
  return set;
}

inline SignalSet simulate_protocol(const OperatorSet& ops, const CouplingStructure& coupling,
                                   const PermeabilityField& field, const Protocol& protocol,
                                   double rho, int neig, const EigOptions& eig_opts = {},
                                   int workers = 1) {
  const ReducedModel model = compute_reduced_basis(ops, coupling, field, neig, eig_opts);
  return simulate_protocol(model, protocol, rho, workers);
}

} // namespace btperm
