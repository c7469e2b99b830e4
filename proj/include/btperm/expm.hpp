// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dense matrix exponential for the reduced propagators: diagonal Pade-13 with
// scaling and squaring on complex matrices, Frechet derivatives through the
// 2n x 2n block augmentation  exp([[A,E],[0,A]]) = [[e^A, L(A,E)],[0, e^A]],
// and a Loewner-product form for real-symmetric arguments where the
// eigendecomposition is available.

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "btperm/common.hpp"

namespace btperm {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

namespace detail {

inline double one_norm(const CMat& a) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    best = std::max(best, a.col(j).cwiseAbs().sum());
  return best;
}

} // namespace detail

inline CMat expm(const CMat& a_in) {
  static const double pade_coeffs[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const Eigen::Index n = a_in.rows();
  if (n != a_in.cols()) throw NumericalError("expm: matrix must be square");

  const double norm = detail::one_norm(a_in);
  if (!std::isfinite(norm)) throw NumericalError("expm: non-finite input");
  int squarings = 0;
  CMat a = a_in;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    a /= std::pow(2.0, squarings);
  }

  const CMat a2 = a * a;
  const CMat a4 = a2 * a2;
  const CMat a6 = a2 * a4;
  const CMat eye = CMat::Identity(n, n);

  CMat u_inner = pade_coeffs[13] * a6 + pade_coeffs[11] * a4 + pade_coeffs[9] * a2;
  CMat u = a * (a6 * u_inner + pade_coeffs[7] * a6 + pade_coeffs[5] * a4 +
                pade_coeffs[3] * a2 + pade_coeffs[1] * eye);
  CMat v_inner = pade_coeffs[12] * a6 + pade_coeffs[10] * a4 + pade_coeffs[8] * a2;
  CMat v = a6 * v_inner + pade_coeffs[6] * a6 + pade_coeffs[4] * a4 +
           pade_coeffs[2] * a2 + pade_coeffs[0] * eye;

  CMat num = v + u;
  CMat den = v - u;
  CMat r = den.partialPivLu().solve(num);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

// Frechet derivative L(A, E) of the exponential at A in direction E.
inline CMat expm_frechet(const CMat& a, const CMat& e) {
  const Eigen::Index n = a.rows();
  CMat block = CMat::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = a;
  block.bottomRightCorner(n, n) = a;
  block.topRightCorner(n, n) = e;
  return expm(block).topRightCorner(n, n);
}

// exp(X) y for X = V diag(mu) V^T (real symmetric eigendecomposition).
inline CVec sym_exp_apply(const Eigen::MatrixXd& vecs, const Eigen::VectorXd& mu,
                          const CVec& y) {
  CVec w = vecs.transpose() * y;
  for (Eigen::Index i = 0; i < mu.size(); ++i) w[i] *= std::exp(mu[i]);
  return vecs * w;
}

// Frechet derivative of exp at X = V diag(mu) V^T in (complex) direction E:
// V (Phi .* (V^T E V)) V^T with the Loewner matrix
// Phi_ij = (e^{mu_i} - e^{mu_j}) / (mu_i - mu_j), Phi_ii = e^{mu_i}.
inline CMat sym_exp_frechet(const Eigen::MatrixXd& vecs, const Eigen::VectorXd& mu,
                            const CMat& e) {
  const Eigen::Index n = mu.size();
  Eigen::MatrixXd phi(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double avg = 0.5 * (mu[i] + mu[j]);
      const double h = 0.5 * (mu[i] - mu[j]);
      // (e^a - e^b)/(a-b) = e^{(a+b)/2} sinh(h)/h, stable for small h.
      const double sinhc = std::abs(h) < 1e-6 ? 1.0 + h * h / 6.0 : std::sinh(h) / h;
      phi(i, j) = std::exp(avg) * sinhc;
    }
  }
  CMat inner = vecs.transpose() * e * vecs;
  inner.array() *= phi.array();
  return vecs * inner * vecs.transpose();
}

} // namespace btperm
