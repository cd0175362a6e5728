#pragma once

// Hand-rolled random generators for property tests. They do not use the
// library's own sampler so that test inputs are independent of the code
// under test.

#include "geocert/expression.hpp"
#include "geocert/spd.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace geocert::testing {

using spd::Matrix;
using spd::Vector;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool coin(double p = 0.5) { return uniform() < p; }

  Matrix gaussian(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }
  Vector gaussian(Eigen::Index n) { return gaussian(n, 1).col(0); }

  /// Orthogonal factor of a Gaussian matrix with the sign convention that
  /// makes it Haar distributed.
  Matrix orthogonal(Eigen::Index d) {
    const Eigen::HouseholderQR<Matrix> qr(gaussian(d, d));
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR();
    for (Eigen::Index j = 0; j < d; ++j)
      if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
  }

  /// SPD matrix with log-eigenvalues uniform on [0, log(cond)] scaled by a
  /// random overall magnitude.
  Matrix spd(Eigen::Index d, double cond = 100.0) {
    const Matrix q = orthogonal(d);
    Vector lambda(d);
    const double scale = std::exp(uniform(-1.0, 1.0));
    for (Eigen::Index i = 0; i < d; ++i) lambda(i) = scale * std::exp(uniform(0.0, std::log(cond)));
    Matrix m = q * lambda.asDiagonal() * q.transpose();
    return 0.5 * (m + m.transpose());
  }

  Matrix symmetric(Eigen::Index d) {
    const Matrix g = gaussian(d, d);
    return 0.5 * (g + g.transpose());
  }

  /// Invertible matrix with singular values in [0.5, 2].
  Matrix invertible(Eigen::Index d) {
    Vector s(d);
    for (Eigen::Index i = 0; i < d; ++i) s(i) = uniform(0.5, 2.0);
    return orthogonal(d) * s.asDiagonal() * orthogonal(d);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace geocert::testing
