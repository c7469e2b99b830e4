// SPDX-License-Identifier: Apache-2.0
#pragma once

// Adam with bias correction (no weight decay), the cyclic warmup+cosine
// learning-rate schedule, and the staged acquisition curriculum.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "btperm/common.hpp"
#include "btperm/encoding.hpp"

namespace btperm {

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(Eigen::Index n = 0)
      : first_moment(Eigen::VectorXd::Zero(n)), second_moment(Eigen::VectorXd::Zero(n)) {}
};

inline void adam_step(AdamState& state, Eigen::VectorXd& theta,
                      const Eigen::VectorXd& grad, double lr) {
  if (theta.size() != grad.size() || theta.size() != state.first_moment.size())
    throw NumericalError("adam_step: size mismatch");
  if (!grad.allFinite())
    throw NumericalError("adam_step: non-finite gradient at step " +
                         std::to_string(state.t));
  ++state.t;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad;
  state.second_moment =
      state.beta2 * state.second_moment + (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double mhat = state.first_moment[i] / bc1;
    const double vhat = state.second_moment[i] / bc2;
    theta[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

// Cyclic schedule: within each `cycle`-iteration block, linear warmup from 0
// to eta0 over `warmup` iterations, then cosine decay to alpha * eta0.
inline double lr_schedule(long t, double eta0 = 0.75, int cycle = 200, int warmup = 50,
                          double alpha = 0.1) {
  if (cycle < 1 || warmup < 0 || warmup >= cycle)
    throw ConfigError("invalid learning-rate schedule parameters");
  const long s = t % cycle;
  if (s < warmup) return eta0 * static_cast<double>(s) / warmup;
  const double phase = static_cast<double>(s - warmup) / (cycle - warmup);
  const double floor = alpha * eta0;
  return floor + (eta0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * phase));
}

enum class ScheduleMode { Staged, Joint };

inline ScheduleMode schedule_mode_from_string(const std::string& s) {
  if (s == "staged") return ScheduleMode::Staged;
  if (s == "joint") return ScheduleMode::Joint;
  throw ConfigError("schedule must be 'staged' or 'joint'");
}

// Staged curriculum: long-Delta acquisitions before t_switch, short-Delta
// from t_switch on (boundary inclusive on the short side). Joint mode uses
// the full set throughout.
inline std::vector<int> active_acquisitions(long t, const Protocol& protocol,
                                            ScheduleMode mode, long t_switch) {
  if (mode == ScheduleMode::Joint) return protocol.all_indices();
  return t < t_switch ? protocol.long_indices() : protocol.short_indices();
}

inline std::string phase_label(long t, ScheduleMode mode, long t_switch) {
  if (mode == ScheduleMode::Joint) return "joint";
  return t < t_switch ? "long" : "short";
}

} // namespace btperm
