// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "btperm/optimizer.hpp"

using namespace btperm;

TEST_CASE("learning-rate schedule hits the pinned values") {
  CHECK(lr_schedule(0) == 0.0);
  CHECK(lr_schedule(50) == Catch::Approx(0.75).epsilon(1e-14));
  CHECK(lr_schedule(125) == Catch::Approx(0.4125).epsilon(1e-12));
  CHECK(lr_schedule(199) == Catch::Approx(0.075).margin(1e-4));
  // The cycle repeats.
  CHECK(lr_schedule(250) == Catch::Approx(lr_schedule(50)).epsilon(1e-14));
  CHECK_THROWS_AS(lr_schedule(0, 0.75, 0, 0, 0.1), ConfigError);
  CHECK_THROWS_AS(lr_schedule(0, 0.75, 100, 100, 0.1), ConfigError);
}

TEST_CASE("adam: zero gradient is a no-op, first step has magnitude ~lr") {
  AdamState state(3);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(3, 1.5);
  const Eigen::VectorXd theta0 = theta;
  adam_step(state, theta, Eigen::VectorXd::Zero(3), 0.5);
  CHECK(theta == theta0);

  AdamState s2(3);
  Eigen::VectorXd grad(3);
  grad << 0.3, -2.0, 1e-4;
  adam_step(s2, theta, grad, 0.5);
  for (int i = 0; i < 3; ++i) {
    const double step = std::abs(theta[i] - theta0[i]);
    CHECK(step <= 0.5);
    CHECK(step >= 0.5 * 0.99);
  }

  Eigen::VectorXd bad(3);
  bad << 1.0, std::nan(""), 0.0;
  CHECK_THROWS_AS(adam_step(s2, theta, bad, 0.1), NumericalError);
}

TEST_CASE("adam matches an independent scalar reference trace") {
  // Reference: straightforward scalar Adam on f(x) = x^2 from x = 1.
  double x_ref = 1.0, m = 0.0, v = 0.0;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, lr = 0.1;
  std::vector<double> trace;
  for (int t = 1; t <= 200; ++t) {
    const double g = 2.0 * x_ref;
    m = beta1 * m + (1 - beta1) * g;
    v = beta2 * v + (1 - beta2) * g * g;
    const double mhat = m / (1 - std::pow(beta1, t));
    const double vhat = v / (1 - std::pow(beta2, t));
    x_ref -= lr * mhat / (std::sqrt(vhat) + eps);
    trace.push_back(x_ref);
  }

  AdamState state(1);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 1.0);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd grad(1);
    grad << 2.0 * theta[0];
    adam_step(state, theta, grad, lr);
    CHECK(std::abs(theta[0] - trace[t]) <= 1e-10);
  }
  CHECK(std::abs(theta[0]) < 0.05); // converged toward the minimum
}

TEST_CASE("staged curriculum switches at t_switch; joint never does") {
  const Protocol protocol = default_protocol();
  const auto longs = protocol.long_indices();
  const auto shorts = protocol.short_indices();

  CHECK(active_acquisitions(0, protocol, ScheduleMode::Staged, 200) == longs);
  CHECK(active_acquisitions(199, protocol, ScheduleMode::Staged, 200) == longs);
  CHECK(active_acquisitions(200, protocol, ScheduleMode::Staged, 200) == shorts);
  CHECK(active_acquisitions(399, protocol, ScheduleMode::Staged, 200) == shorts);
  for (long t : {0L, 200L, 399L})
    CHECK(active_acquisitions(t, protocol, ScheduleMode::Joint, 200) ==
          protocol.all_indices());

  CHECK(phase_label(0, ScheduleMode::Staged, 200) == "long");
  CHECK(phase_label(200, ScheduleMode::Staged, 200) == "short");
  CHECK(phase_label(5, ScheduleMode::Joint, 200) == "joint");
}
