// SPDX-License-Identifier: Apache-2.0
#pragma once

// Lowest eigenpairs of the symmetric generalized problem A u = lambda M u with
// M SPD and A PSD. Shift-invert block Krylov: factor A + sigma*M once, build
// an M-orthonormal block Krylov basis of T = (A + sigma*M)^{-1} M, then
// Rayleigh-Ritz on (A, M) over that basis, restarting from the Ritz block
// until the requested residual tolerance holds. Block width exceeds the number
// of wanted pairs, so degenerate clusters (up to the block width) are resolved
// reliably; all stages are deterministic for a fixed seed and independent of
// the worker count (parallel work is per-column with disjoint outputs).

#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "btperm/common.hpp"
#include "btperm/fem.hpp"

namespace btperm {

struct EigOptions {
  int block_extra = 24;  // oversampling beyond neig
  int max_basis = 0;     // 0 -> min(n, 4 * block)
  int max_restarts = 10;
  double shift = 0.02;   // sigma, 1/ms
  double tol = 1e-8;     // ||A u - lambda M u|| <= tol * ||M u||
  unsigned seed = 12345;
  int workers = 1;
};

struct EigResult {
  Eigen::MatrixXd vectors;   // n x neig, M-orthonormal, ascending eigenvalues
  Eigen::VectorXd values;
  Eigen::VectorXd residuals; // ||A u - lambda M u|| per pair
  int restarts = 0;
};

namespace detail {

// Deterministic per-eigenvector sign: largest-magnitude component positive.
inline void fix_sign(Eigen::Ref<Eigen::VectorXd> u) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (u[best] < 0.0) u = -u;
}

// M-orthonormalize the block Y in place (projection against [V, MV] done by
// the caller). Returns the retained column count after dropping dependent
// directions.
inline Eigen::Index orthonormalize_block(Eigen::MatrixXd& y, const SpMat& m) {
  Eigen::MatrixXd gram = y.transpose() * (m * y);
  gram = 0.5 * (gram + gram.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double max_ev = es.eigenvalues().cwiseAbs().maxCoeff();
  const double drop = std::max(max_ev, 1.0) * 1e-24;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > drop) keep.push_back(i);
  Eigen::MatrixXd w(y.cols(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
    w.col(static_cast<Eigen::Index>(k)) =
        es.eigenvectors().col(keep[k]) / std::sqrt(es.eigenvalues()[keep[k]]);
  y = (y * w).eval();
  return y.cols();
}

} // namespace detail

inline EigResult solve_lowest_generalized(const SpMat& a, const SpMat& m, int neig,
                                          const EigOptions& opts = {}) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || m.rows() != n || m.cols() != n)
    throw NumericalError("eigensolve: dimension mismatch");
  if (neig < 1 || neig > n) throw NumericalError("eigensolve: invalid neig");

  const Eigen::Index block = std::min<Eigen::Index>(n, neig + opts.block_extra);
  const Eigen::Index max_basis =
      opts.max_basis > 0 ? std::min<Eigen::Index>(n, opts.max_basis)
                         : std::min<Eigen::Index>(n, 4 * block);

  const SpMat shifted = a + opts.shift * m;
  Eigen::SimplicialLDLT<SpMat> factor(shifted);
  if (factor.info() != Eigen::Success)
    throw NumericalError("eigensolve: factorization of the shifted operator failed");

  // One step of iterative refinement keeps the Krylov directions accurate even
  // when the shifted operator is ill conditioned.
  auto solve_columns = [&](const Eigen::MatrixXd& rhs) {
    Eigen::MatrixXd x(n, rhs.cols());
    parallel_for(static_cast<std::size_t>(rhs.cols()), opts.workers, [&](std::size_t j) {
      const Eigen::Index col = static_cast<Eigen::Index>(j);
      Eigen::VectorXd y = factor.solve(rhs.col(col));
      Eigen::VectorXd r = rhs.col(col) - shifted * y;
      y += factor.solve(r);
      x.col(col) = y;
    });
    return x;
  };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = gauss(rng);
  if (detail::orthonormalize_block(x, m) == 0)
    throw NumericalError("eigensolve: degenerate start block");

  EigResult result;
  double worst_residual = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    Eigen::MatrixXd basis = x;
    Eigen::MatrixXd mbasis = m * basis;
    Eigen::MatrixXd current = x;

    while (basis.cols() < max_basis) {
      Eigen::MatrixXd next = solve_columns(m * current);
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::MatrixXd coeff = mbasis.transpose() * next;
        next.noalias() -= basis * coeff;
      }
      if (detail::orthonormalize_block(next, m) == 0) break;
      if (basis.cols() + next.cols() > max_basis)
        next = next.leftCols(max_basis - basis.cols()).eval();
      const Eigen::Index old = basis.cols();
      basis.conservativeResize(Eigen::NoChange, old + next.cols());
      basis.rightCols(next.cols()) = next;
      mbasis.conservativeResize(Eigen::NoChange, old + next.cols());
      mbasis.rightCols(next.cols()) = m * next;
      current = next;
    }

    // Rayleigh-Ritz on (A, M) over the accumulated basis.
    Eigen::MatrixXd av = a * basis;
    Eigen::MatrixXd h = basis.transpose() * av;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::MatrixXd g = basis.transpose() * mbasis;
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(h, g);
    if (es.info() != Eigen::Success)
      throw NumericalError("eigensolve: dense Rayleigh-Ritz failed");

    const Eigen::Index took = std::min<Eigen::Index>(block, es.eigenvalues().size());
    x = basis * es.eigenvectors().leftCols(took);

    result.values = es.eigenvalues().head(neig);
    result.vectors = x.leftCols(neig);
    result.residuals.resize(neig);
    worst_residual = 0.0;
    bool converged = true;
    const Eigen::MatrixXd au = a * result.vectors;
    const Eigen::MatrixXd mu = m * result.vectors;
    for (int i = 0; i < neig; ++i) {
      const double res = (au.col(i) - result.values[i] * mu.col(i)).norm();
      result.residuals[i] = res;
      worst_residual = std::max(worst_residual, res / std::max(mu.col(i).norm(), 1e-300));
      if (res > opts.tol * mu.col(i).norm()) converged = false;
    }
    result.restarts = restart + 1;
    if (converged) {
      for (int i = 0; i < neig; ++i) detail::fix_sign(result.vectors.col(i));
      return result;
    }
  }

  throw NumericalError(
      "eigensolve: no convergence after " + std::to_string(opts.max_restarts) +
      " restarts; worst relative residual " + std::to_string(worst_residual));
}

} // namespace btperm
