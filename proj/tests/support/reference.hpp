#pragma once

// Independent reference computations. None of them call the library's
// eigendecomposition-based kernels.

#include "geocert/spd.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <vector>

namespace geocert::testing {

using spd::Matrix;
using spd::Vector;

/// Principal square root by the Denman-Beavers iteration.
inline Matrix denman_beavers_sqrt(const Matrix& a, int max_iter = 100) {
  Matrix y = a;
  Matrix z = Matrix::Identity(a.rows(), a.cols());
  for (int k = 0; k < max_iter; ++k) {
    const Matrix y_inv = y.inverse();
    const Matrix z_inv = z.inverse();
    const Matrix y_next = 0.5 * (y + z_inv);
    const Matrix z_next = 0.5 * (z + y_inv);
    const double change = (y_next - y).norm();
    y = y_next;
    z = z_next;
    if (change <= 1e-15 * y.norm()) break;
  }
  return 0.5 * (y + y.transpose());
}

/// Power of an SPD matrix through a Cholesky congruence: with A = L L^T,
/// A #_t B = L (L^{-1} B L^{-T})^t L^T. The inner power uses a
/// self-adjoint solver on the congruent matrix.
inline Matrix cholesky_geodesic(const Matrix& a, const Matrix& b, double t) {
  const Eigen::LLT<Matrix> llt(a);
  const Matrix l = llt.matrixL();
  const Matrix l_inv = l.inverse();
  Matrix c = l_inv * b * l_inv.transpose();
  c = 0.5 * (c + c.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  const Vector p = es.eigenvalues().array().pow(t);
  const Matrix ct = es.eigenvectors() * p.asDiagonal() * es.eigenvectors().transpose();
  const Matrix g = l * ct * l.transpose();
  return 0.5 * (g + g.transpose());
}

/// Residual of the Riccati characterization of the geometric mean:
/// G = A # B is the unique SPD solution of G A^{-1} G = B.
inline double riccati_residual(const Matrix& g, const Matrix& a, const Matrix& b) {
  return (g * a.ldlt().solve(g) - b).norm() / b.norm();
}

/// Affine-invariant distance from the generalized eigenvalues of (A, B).
inline double generalized_eig_distance(const Matrix& a, const Matrix& b) {
  const Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(a, b);
  return std::sqrt(es.eigenvalues().array().log().square().sum());
}

/// Fourth-order central difference of f at X along the symmetric direction V.
inline double central_difference(const std::function<double(const Matrix&)>& f, const Matrix& x,
                                 const Matrix& v, double h) {
  return (f(x - 2.0 * h * v) - 8.0 * f(x - h * v) + 8.0 * f(x + h * v) - f(x + 2.0 * h * v)) / (12.0 * h);
}

/// Tyler's fixed-point iteration S <- (d/n) sum x x^T / (x^T S^{-1} x),
/// normalized to trace d after every step.
inline Matrix tyler_fixed_point(const std::vector<Vector>& xs, int iters = 20000, double tol = 1e-13) {
  const auto d = xs.front().size();
  const double n = static_cast<double>(xs.size());
  Matrix s = Matrix::Identity(d, d);
  for (int k = 0; k < iters; ++k) {
    Matrix next = Matrix::Zero(d, d);
    const Eigen::LDLT<Matrix> ldlt(s);
    for (const auto& x : xs) next += x * x.transpose() / x.dot(ldlt.solve(x));
    next *= static_cast<double>(d) / n;
    next *= static_cast<double>(d) / next.trace();
    const double change = (next - s).norm() / s.norm();
    s = 0.5 * (next + next.transpose());
    if (change < tol) break;
  }
  return s;
}

/// Largest eigenvalue of a symmetric matrix via a self-adjoint solver.
inline double lambda_max(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

inline double relative_error(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

}  // namespace geocert::testing
