// SPDX-License-Identifier: Apache-2.0
#pragma once

// Inversion objective: normalized-signal data loss, adjacency-weighted
// continuity regularizer, and the soft manifold regularizer on edge barrier
// counts. Regularizer gradients are closed-form (they do not pass through the
// PDE); the data term produces per-acquisition signal adjoints for the
// reverse-mode path.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "btperm/common.hpp"
#include "btperm/encoding.hpp"
#include "btperm/mesh.hpp"
#include "btperm/permeability.hpp"
#include "btperm/reduced.hpp"

namespace btperm {

// Soft barrier indicator from log10 permeability, centered at the extraction
// threshold: p = sigmoid((k_thr - k) / tau_p).
inline double p_non_from_log10(double k, double tau_p, double k_thr = -3.0) {
  return sigmoid((k_thr - k) / tau_p);
}
inline double p_non_deriv_dk(double k, double tau_p, double k_thr = -3.0) {
  return -sigmoid_deriv((k_thr - k) / tau_p) / tau_p;
}
inline double p_non(double kappa, double tau_p, double k_thr = -3.0) {
  return p_non_from_log10(std::log10(kappa), tau_p, k_thr);
}

// softmin(a, b) = -tau log(e^{-a/tau} + e^{-b/tau}), stabilized so large
// inputs cannot overflow. Value <= min(a, b) and -> min(a, b) as tau -> 0.
inline double softmin(double a, double b, double tau) {
  if (!(tau > 0.0)) throw ConfigError("softmin temperature must be positive");
  const double lo = std::min(a, b);
  return lo - tau * std::log(std::exp(-(a - lo) / tau) + std::exp(-(b - lo) / tau));
}

// d softmin/da and d softmin/db (softmax weights of the two branches).
inline std::pair<double, double> softmin_weights(double a, double b, double tau) {
  const double lo = std::min(a, b);
  const double wa = std::exp(-(a - lo) / tau);
  const double wb = std::exp(-(b - lo) / tau);
  return {wa / (wa + wb), wb / (wa + wb)};
}

struct DataLossResult {
  double value = 0.0;
  std::vector<Complex> sbar; // dL/dS aligned with the active index list
};

// sum_a || S_a / S0hat - S*_a / S0* ||^2 over the active set, complex
// residuals; both b=0 references are those of the acquisition's Delta group.
// The predicted normalization S0hat depends on kappa too, so its adjoint is
// routed to the group's b=0 slot.
inline DataLossResult data_loss(const Protocol& protocol, const std::vector<int>& active,
                                const SignalSet& predicted, const SignalSet& reference) {
  DataLossResult out;
  out.sbar.assign(active.size(), Complex(0.0, 0.0));
  for (std::size_t i = 0; i < active.size(); ++i) {
    const int a = active[i];
    const int b0 = protocol.b0_index_for(a);
    const Complex s0_hat = predicted.signals[b0];
    const Complex s0_ref = reference.signals[b0];
    if (std::abs(s0_hat) == 0.0 || std::abs(s0_ref) == 0.0)
      throw NumericalError("zero b=0 reference signal");
    const Complex s = predicted.signals[a];
    const Complex r = s / s0_hat - reference.signals[a] / s0_ref;
    out.value += std::norm(r);
    out.sbar[i] += 2.0 * r / std::conj(s0_hat);
    // Normalization term: dL/dS0hat routed to the b=0 member of the group.
    const Complex s0bar = -2.0 * r * std::conj(s) / std::conj(s0_hat * s0_hat);
    for (std::size_t j = 0; j < active.size(); ++j)
      if (active[j] == b0) out.sbar[j] += s0bar;
  }
  return out;
}

struct RegularizerResult {
  double value = 0.0;
  Eigen::VectorXd dkappa; // direct dependence on kappa
  Eigen::VectorXd dp;     // dependence through p_non
};

// R_cont = sum_{(f,f')} w_ff' (kappa_f - kappa_f')^2 over adjacent interior
// face pairs, w = 1 - |p_f - p_f'| so likely barrier transitions are free.
inline RegularizerResult reg_continuity(const Eigen::VectorXd& kappa,
                                        const Eigen::VectorXd& p,
                                        const std::vector<std::pair<int, int>>& adjacency) {
  RegularizerResult out;
  out.dkappa = Eigen::VectorXd::Zero(kappa.size());
  out.dp = Eigen::VectorXd::Zero(kappa.size());
  for (const auto& [f, g] : adjacency) {
    const double d = kappa[f] - kappa[g];
    const double pd = p[f] - p[g];
    const double w = 1.0 - std::abs(pd);
    out.value += w * d * d;
    out.dkappa[f] += 2.0 * w * d;
    out.dkappa[g] -= 2.0 * w * d;
    const double s = pd > 0.0 ? 1.0 : (pd < 0.0 ? -1.0 : 0.0);
    out.dp[f] -= s * d * d;
    out.dp[g] += s * d * d;
  }
  return out;
}

// R_man = sum_e softmin(k_e^2, (k_e - 2)^2) with k_e the summed barrier
// probability of the interior faces at edge e; penalizes edges whose barrier
// incidence strays from 0 or 2.
inline RegularizerResult reg_manifold(const Eigen::VectorXd& p,
                                      const std::vector<MeshEdge>& edges, double tau_m) {
  RegularizerResult out;
  out.dkappa = Eigen::VectorXd::Zero(p.size());
  out.dp = Eigen::VectorXd::Zero(p.size());
  for (const auto& edge : edges) {
    double ke = 0.0;
    for (int f : edge.faces) ke += p[f];
    const double a = ke * ke;
    const double b = (ke - 2.0) * (ke - 2.0);
    out.value += softmin(a, b, tau_m);
    const auto [wa, wb] = softmin_weights(a, b, tau_m);
    const double dke = wa * 2.0 * ke + wb * 2.0 * (ke - 2.0);
    for (int f : edge.faces) out.dp[f] += dke;
  }
  return out;
}

struct ObjectiveParams {
  double lambda_data = 100.0;
  double lambda_cont = 2.0;
  double lambda_man_max = 2.0;
  int lambda_man_ramp = 400; // iterations for the linear ramp from 0
  double tau_p = 0.5;
  double tau_m = 0.5;
  double k_thr = -3.0; // log10 of the extraction threshold
};

inline double lambda_man_at(const ObjectiveParams& params, long iteration) {
  if (params.lambda_man_ramp <= 0) return params.lambda_man_max;
  const double frac = std::min(1.0, static_cast<double>(iteration) / params.lambda_man_ramp);
  return frac * params.lambda_man_max;
}

} // namespace btperm
