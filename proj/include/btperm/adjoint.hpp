// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reverse-mode gradient of the signal path. The basis is treated as fixed
// between refreshes, so the loss reaches theta only through the reduced
// coupling:  theta -> kappa (sigmoid chain) -> U^T B(kappa) U (linear per
// face) -> interval exponentials -> readout -> loss.
//
// Complex adjoint convention: for a complex quantity z, zbar is defined by
// dL = Re(conj(zbar) dz), i.e. zbar = dL/dRe(z) + i dL/dIm(z). For the matrix
// exponential E = exp(X), <Ebar, L(X,dX)>_F = <L(X^H, Ebar), dX>_F, so each
// interval contributes Xbar = L(X^H, Ebar) through one block-augmented
// exponential (or the Loewner form on zero-gradient intervals).

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "btperm/common.hpp"
#include "btperm/coupling.hpp"
#include "btperm/encoding.hpp"
#include "btperm/expm.hpp"
#include "btperm/permeability.hpp"
#include "btperm/reduced.hpp"

namespace btperm {

// dL/dC (m x m, real) for one acquisition, where C is the symmetric reduced
// operator; sbar is dL/dS for this acquisition's signal.
inline Eigen::MatrixXd propagate_adjoint(const ReducedModel& model, const Acquisition& acq,
                                         double rho, Complex sbar) {
  const auto intervals = waveform_intervals(acq);
  const int m = model.dim();
  const Eigen::MatrixXd sym_op = model.symmetric_operator();

  struct Step {
    double h = 0.0;
    bool zero_gradient = false;
    CMat exponent;   // X = -h (C + i gamma g.J), lobes only
    CMat propagator; // exp(X), lobes only
    CVec state_in;
  };
  std::vector<Step> steps;
  steps.reserve(intervals.size());

  CVec y = (rho * model.readout).cast<Complex>();
  for (const auto& iv : intervals) {
    const double h = iv.duration();
    if (h < 0.0) throw NumericalError("negative interval duration");
    if (h == 0.0) continue;
    Step step;
    step.h = h;
    step.state_in = y;
    if (iv.amplitude.isZero(0.0)) {
      step.zero_gradient = true;
      y = sym_exp_apply(model.sym_vecs, (-h) * model.sym_vals, y);
    } else {
      step.exponent = (-h) * detail::interval_generator(model, sym_op, iv.amplitude);
      step.propagator = expm(step.exponent);
      y = step.propagator * y;
    }
    steps.push_back(std::move(step));
  }

  Eigen::MatrixXd cbar = Eigen::MatrixXd::Zero(m, m);
  CVec ybar = sbar * model.readout.cast<Complex>();
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    const CMat ebar = ybar * it->state_in.adjoint();
    CMat xbar;
    if (it->zero_gradient) {
      xbar = sym_exp_frechet(model.sym_vecs, (-it->h) * model.sym_vals, ebar);
      ybar = sym_exp_apply(model.sym_vecs, (-it->h) * model.sym_vals, ybar);
    } else {
      xbar = expm_frechet(it->exponent.adjoint(), ebar);
      ybar = it->propagator.adjoint() * ybar;
    }
    // X = -h (C + i ...); dX/dC picks -h and the real part.
    cbar.noalias() += (-it->h) * xbar.real();
  }
  return cbar;
}

// dLoss/dtheta per interior face for a weighted set of acquisitions with
// upstream signal adjoints sbar. Acquisitions are processed in parallel into
// per-slot accumulators and summed in a fixed order.
inline Eigen::VectorXd signal_gradient(const ReducedModel& model,
                                       const CouplingStructure& coupling,
                                       const PermeabilityField& field,
                                       const Protocol& protocol,
                                       const std::vector<int>& active,
                                       const std::vector<Complex>& sbar, double rho,
                                       int workers = 1) {
  if (active.size() != sbar.size())
    throw NumericalError("signal_gradient: adjoint/active size mismatch");
  const int m = model.dim();
  std::vector<Eigen::MatrixXd> slots(active.size());
  parallel_for(active.size(), workers, [&](std::size_t i) {
    if (sbar[i] == Complex(0.0, 0.0)) {
      slots[i] = Eigen::MatrixXd::Zero(m, m);
      return;
    }
    slots[i] = propagate_adjoint(model, protocol.acquisitions[active[i]], rho, sbar[i]);
  });
  Eigen::MatrixXd cbar = Eigen::MatrixXd::Zero(m, m);
  for (const auto& slot : slots) cbar += slot;

  const Eigen::VectorXd dkappa_internal = coupling.gradient_contract(model.basis, cbar);
  Eigen::VectorXd dtheta(field.n_faces());
  for (int f = 0; f < field.n_faces(); ++f)
    dtheta[f] = dkappa_internal[f] * units::kKappaToUmPerMs *
                field.reparam.dkappa_dtheta(field.theta[f]);
  return dtheta;
}

} // namespace btperm
