// SPDX-License-Identifier: Apache-2.0
#pragma once

// The optimization loop: staged (or joint) acquisition selection, periodic
// basis refresh, forward simulation, weighted objective, reverse-mode signal
// gradient plus closed-form regularizer gradients, Adam with the cyclic
// schedule, and a streamed per-iteration history.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "btperm/adjoint.hpp"
#include "btperm/common.hpp"
#include "btperm/coupling.hpp"
#include "btperm/encoding.hpp"
#include "btperm/fem.hpp"
#include "btperm/mesh.hpp"
#include "btperm/objective.hpp"
#include "btperm/optimizer.hpp"
#include "btperm/permeability.hpp"
#include "btperm/reduced.hpp"

namespace btperm {

struct InversionSettings {
  int iters = 400;
  int t_switch = 200;
  ScheduleMode schedule = ScheduleMode::Staged;

  double eta0 = 0.75;
  int cycle = 200;
  int warmup = 50;
  double alpha = 0.1;

  ObjectiveParams objective;
  SigmoidReparam reparam;

  int neig = 60;
  int refresh_n = 50;
  double rho = 1.0;
  unsigned seed = 0;
  int workers = 1;
  double eig_tol = 1e-8;
};

struct HistoryRow {
  long iter = 0;
  double loss_total = 0.0;
  double loss_data = 0.0;
  double reg_cont = 0.0;
  double reg_man = 0.0;
  double lr = 0.0;
  std::string phase;
};

struct InversionResult {
  PermeabilityField field;
  std::vector<HistoryRow> history;
};

using HistorySink = std::function<void(const HistoryRow&)>;

inline InversionResult run_inversion(const Mesh& mesh, const OperatorSet& ops,
                                     const CouplingStructure& coupling,
                                     const Protocol& protocol, const SignalSet& reference,
                                     const InversionSettings& cfg,
                                     const HistorySink& sink = {}) {
  protocol.validate();
  if (static_cast<int>(reference.signals.size()) != protocol.size())
    throw ConfigError("reference signals do not match the protocol");

  const int n_faces = coupling.n_faces();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_faces); // kappa = 10^-3 everywhere
  AdamState adam(n_faces);

  EigOptions eig_opts;
  eig_opts.tol = cfg.eig_tol;
  eig_opts.seed = cfg.seed == 0 ? 12345 : cfg.seed;
  eig_opts.workers = cfg.workers;

  InversionResult out;
  out.history.reserve(cfg.iters);
  ReducedModel model;

  for (long t = 0; t < cfg.iters; ++t) {
    PermeabilityField field = PermeabilityField::from_theta(theta, cfg.reparam);
    maybe_refresh_basis(model, t, cfg.refresh_n, ops, coupling, field, cfg.neig, eig_opts);

    const std::vector<int> active =
        active_acquisitions(t, protocol, cfg.schedule, cfg.t_switch);

    SignalSet predicted;
    predicted.signals.assign(protocol.size(), Complex(0.0, 0.0));
    parallel_for(active.size(), cfg.workers, [&](std::size_t i) {
      predicted.signals[active[i]] =
          propagate(model, protocol.acquisitions[active[i]], cfg.rho);
    });

    const DataLossResult data = data_loss(protocol, active, predicted, reference);

    Eigen::VectorXd p(n_faces), dp_dtheta(n_faces);
    for (int f = 0; f < n_faces; ++f) {
      const double k = cfg.reparam.log10_kappa(theta[f]);
      p[f] = p_non_from_log10(k, cfg.objective.tau_p, cfg.objective.k_thr);
      dp_dtheta[f] = p_non_deriv_dk(k, cfg.objective.tau_p, cfg.objective.k_thr) *
                     cfg.reparam.dlog10_dtheta(theta[f]);
    }
    const RegularizerResult cont = reg_continuity(field.kappa, p, mesh.face_adjacency());
    const RegularizerResult man = reg_manifold(p, mesh.edges(), cfg.objective.tau_m);

    const double lambda_man = lambda_man_at(cfg.objective, t);
    const double total = cfg.objective.lambda_data * data.value +
                         cfg.objective.lambda_cont * cont.value + lambda_man * man.value;
    if (!std::isfinite(total))
      throw NumericalError("non-finite loss at iteration " + std::to_string(t));

    // Gradient: signal path (reverse mode) + closed-form regularizers.
    std::vector<Complex> sbar(data.sbar.size());
    for (std::size_t i = 0; i < sbar.size(); ++i)
      sbar[i] = cfg.objective.lambda_data * data.sbar[i];
    Eigen::VectorXd grad = signal_gradient(model, coupling, field, protocol, active, sbar,
                                           cfg.rho, cfg.workers);
    for (int f = 0; f < n_faces; ++f) {
      const double dkappa = cfg.reparam.dkappa_dtheta(theta[f]);
      grad[f] += cfg.objective.lambda_cont *
                     (cont.dkappa[f] * dkappa + cont.dp[f] * dp_dtheta[f]) +
                 lambda_man * man.dp[f] * dp_dtheta[f];
    }

    const double lr = lr_schedule(t, cfg.eta0, cfg.cycle, cfg.warmup, cfg.alpha);
    adam_step(adam, theta, grad, lr);

    HistoryRow row{t, total, data.value, cont.value, man.value, lr,
                   phase_label(t, cfg.schedule, cfg.t_switch)};
    if (sink) sink(row);
    out.history.push_back(std::move(row));
  }

  out.field = PermeabilityField::from_theta(theta, cfg.reparam);
  return out;
}

} // namespace btperm
