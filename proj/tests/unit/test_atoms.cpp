#include "generators.hpp"
#include "reference.hpp"

#include "geocert/errors.hpp"
#include "geocert/spd_atoms.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace geocert {
namespace {

using spd::Matrix;
using spd::Vector;
using testing::relative_error;
using testing::Rng;

Matrix sigma2() {
  Matrix s(3, 3);
  s << 1.0, 0.5, -0.6, 0.5, 1.2, 0.4, -0.6, 0.4, 1.0;
  return s;
}

Vector descending_eigenvalues(const Matrix& m) {
  Vector l = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
  std::sort(l.data(), l.data() + l.size(), std::greater<>());
  return l;
}

TEST(ScalarAtoms, KnownValues) {
  Matrix d3 = Vector::LinSpaced(3, 1, 3).asDiagonal();
  EXPECT_DOUBLE_EQ(spd::eigsummax(d3, 2), 5.0);
  EXPECT_DOUBLE_EQ(spd::trace(d3), 6.0);
  Matrix ones_plus = Matrix::Ones(2, 2) + Matrix::Identity(2, 2);
  EXPECT_DOUBLE_EQ(spd::entry_sum(ones_plus), 6.0);
  EXPECT_NEAR(spd::eigmax(d3), 3.0, 1e-15);
  Rng rng(1);
  const Matrix x = rng.spd(4);
  EXPECT_NEAR(spd::sdivergence(x, x), 0.0, 1e-12);
  EXPECT_NEAR(spd::distance_atom(x, x), 0.0, 1e-12);
}

TEST(ScalarAtoms, EntrywiseNormOfSigma2Root) {
  const Matrix root = testing::denman_beavers_sqrt(sigma2());
  EXPECT_NEAR(spd::entrywise_l1(root), 4.7638, 5e-4);
  EXPECT_DOUBLE_EQ(0.5 * spd::entrywise_l1(Matrix::Identity(3, 3)) + 0.5 * spd::entrywise_l1(sigma2()), 4.6);
}

TEST(ScalarAtoms, MatchIndependentFormulas) {
  Rng rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index d = rng.integer(1, 6);
    const Matrix x = rng.spd(d, 1e3);
    const Matrix y = rng.spd(d, 1e3);
    const Vector lam = descending_eigenvalues(x);
    const double tol = 1e-9;

    EXPECT_NEAR(spd::logdet_atom(x), std::log(x.determinant()), tol * std::max(1.0, std::abs(std::log(x.determinant()))));
    const double sdiv = std::log((0.5 * (x + y)).determinant()) - 0.5 * std::log(x.determinant() * y.determinant());
    EXPECT_NEAR(spd::sdivergence(x, y), sdiv, tol * std::max(1.0, std::abs(sdiv)));
    const double dist = testing::generalized_eig_distance(x, y);
    EXPECT_NEAR(spd::distance_atom(x, y), dist, tol * std::max(1.0, dist));

    const Vector h = rng.gaussian(d);
    EXPECT_NEAR(spd::quad_form(h, x), h.dot(x * h), tol * std::abs(h.dot(x * h)));
    const std::vector<Vector> hs{h, rng.gaussian(d)};
    const double lq = std::log(hs[0].dot(x * hs[0]) + hs[1].dot(x * hs[1]));
    EXPECT_NEAR(spd::log_quad_form(hs, x), lq, tol * std::max(1.0, std::abs(lq)));

    const int k = rng.integer(1, static_cast<int>(d));
    EXPECT_NEAR(spd::eigsummax(x, k), lam.head(k).sum(), tol * lam.sum());
    EXPECT_NEAR(spd::sum_log_eigmax(x, k), lam.head(k).array().log().sum(), tol * std::max(1.0, lam.head(k).array().log().abs().sum()));
    double spl = 0.0;
    for (int i = 0; i < k; ++i) spl += std::pow(std::max(std::log(lam(i)), 0.0), 2.0);
    EXPECT_NEAR(spd::sum_pow_log_eigmax(x, k, 2.0), spl, tol * std::max(1.0, spl));
    const double p = rng.uniform(1.0, 4.0);
    const double sch = std::pow(lam.array().pow(p).sum(), 1.0 / p);
    EXPECT_NEAR(spd::schatten_norm(x, p), sch, tol * sch);
    EXPECT_NEAR(spd::entrywise_l1(x), x.cwiseAbs().sum(), tol * x.cwiseAbs().sum());
  }
}

TEST(MatrixAtoms, MatchIndependentFormulas) {
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index d = rng.integer(1, 6);
    const Matrix x = rng.spd(d, 1e3);
    const Matrix b = rng.gaussian(d, std::max<Eigen::Index>(1, d - 1));
    EXPECT_LE(relative_error(spd::conjugation(x, b), b.transpose() * x * b), 1e-12);
    EXPECT_LE(relative_error(spd::adjoint(x), x.transpose()), 1e-15);
    EXPECT_LE(relative_error(spd::inverse(x), x.inverse()), 1e-9);
    const Matrix m = rng.spd(d, 10);
    EXPECT_LE(relative_error(spd::hadamard_product(x, m), x.cwiseProduct(m)), 1e-15);
    EXPECT_LE(relative_error(spd::diag_matrix(x), Matrix(x.diagonal().asDiagonal())), 1e-15);
    const std::vector<Matrix> ys{rng.gaussian(d, d), rng.gaussian(d, d)};
    const Matrix bb = rng.spd(d, 10);
    Matrix want = bb;
    for (const auto& y : ys) want += y.transpose() * x * y;
    EXPECT_LE(relative_error(spd::positive_affine(x, ys, bb, 1), want), 1e-12);
    Matrix want_inv = bb;
    for (const auto& y : ys) want_inv += y.transpose() * x.inverse() * y;
    EXPECT_LE(relative_error(spd::positive_affine(x, ys, bb, -1), want_inv), 1e-9);
  }
}

TEST(Atoms, RejectNonSpdManifoldArguments) {
  Matrix bad(2, 2);
  bad << 1, 0, 0, -1;
  EXPECT_THROW(spd::logdet_atom(bad), DomainError);
  EXPECT_THROW(spd::distance_atom(bad, Matrix::Identity(2, 2)), DomainError);
}

TEST(Atoms, ListViews) {
  Matrix cols(2, 3);
  cols << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(spd::as_vector_list(NumericArg(cols)).size(), 3u);
  EXPECT_EQ(spd::as_vector_list(NumericArg(Vector(Vector::Ones(2)))).size(), 1u);
  EXPECT_EQ(spd::as_matrix_list(NumericArg(cols)).size(), 1u);
  EXPECT_THROW(spd::as_vector_list(NumericArg(1.0)), SignatureError);
  EXPECT_THROW(spd::as_matrix_list(NumericArg(1.0)), SignatureError);
}

TEST(Atoms, DispatchByIdMatchesDirectCalls) {
  Rng rng(4);
  const Matrix x = rng.spd(3);
  const std::vector<NumericArg> one{x};
  EXPECT_DOUBLE_EQ(std::get<double>(spd::eval_atom("logdet", one)), spd::logdet_atom(x));
  EXPECT_DOUBLE_EQ(std::get<double>(spd::eval_atom("tr", one)), spd::trace(x));
  const std::vector<NumericArg> two{x, 2.0};
  EXPECT_DOUBLE_EQ(std::get<double>(spd::eval_atom("eigsummax", two)), spd::eigsummax(x, 2));
  EXPECT_THROW(spd::eval_atom("no_such_atom", one), SignatureError);
}

}  // namespace
}  // namespace geocert
