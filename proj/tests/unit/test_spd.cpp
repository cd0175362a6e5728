#include "generators.hpp"
#include "reference.hpp"

#include "geocert/errors.hpp"
#include "geocert/spd.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace geocert {
namespace {

using spd::Matrix;
using spd::SPDMatrix;
using spd::Vector;
using testing::relative_error;
using testing::Rng;

Matrix diag(std::initializer_list<double> v) {
  Vector d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

TEST(SymEig, SortsDescending) {
  const auto e = spd::sym_eig(diag({3, 1, 2}));
  EXPECT_DOUBLE_EQ(e.lambda(0), 3.0);
  EXPECT_DOUBLE_EQ(e.lambda(1), 2.0);
  EXPECT_DOUBLE_EQ(e.lambda(2), 1.0);
  const auto id = spd::sym_eig(Matrix::Identity(3, 3));
  EXPECT_TRUE(id.lambda.isApprox(Vector::Ones(3)));
}

TEST(SymEig, ReconstructsRandomSymmetric) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = rng.symmetric(rng.integer(1, 8));
    const auto e = spd::sym_eig(m);
    const Matrix back = e.q * e.lambda.asDiagonal() * e.q.transpose();
    EXPECT_LE((back - m).norm(), 1e-9 * m.norm());
  }
}

TEST(SymEig, RejectsAsymmetricAndNonSquare) {
  Matrix m(2, 2);
  m << 1, 2, 0, 1;
  EXPECT_THROW(spd::sym_eig(m), ShapeError);
  EXPECT_THROW(spd::sym_eig(Matrix::Ones(2, 3)), ShapeError);
}

TEST(SPDMatrix, ValidatesDefiniteness) {
  EXPECT_NO_THROW(SPDMatrix(Matrix::Identity(3, 3)));
  EXPECT_THROW(SPDMatrix(diag({1, -1})), DomainError);
  EXPECT_THROW(SPDMatrix(diag({1, 0})), DomainError);
  EXPECT_FALSE(spd::is_spd(diag({1, 1e-12})));
  EXPECT_TRUE(spd::is_spd(diag({1, 1e-9})));
}

TEST(MatrixFunctions, KnownValues) {
  EXPECT_TRUE(spd::sqrt(SPDMatrix::identity(3)).matrix().isApprox(Matrix::Identity(3, 3)));
  EXPECT_TRUE(spd::inv(SPDMatrix(diag({2, 4}))).matrix().isApprox(diag({0.5, 0.25})));
  EXPECT_TRUE(spd::pow(SPDMatrix(diag({16, 16})), 0.5).matrix().isApprox(diag({4, 4}), 1e-14));
}

TEST(MatrixFunctions, SqrtMatchesDenmanBeavers) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix a = rng.spd(rng.integer(1, 7), 1e3);
    const Matrix got = spd::sqrt(SPDMatrix(a)).matrix();
    EXPECT_LE(relative_error(got, testing::denman_beavers_sqrt(a)), 1e-10);
    EXPECT_LE(relative_error(got * got, a), 1e-9);
  }
}

TEST(MatrixFunctions, RoundTrips) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = rng.integer(1, 6);
    const Matrix s = rng.symmetric(d);
    EXPECT_LE(relative_error(spd::log(spd::exp_sym(s)), s), 1e-9);
    const Matrix a = rng.spd(d, 1e4);
    const SPDMatrix pa(a);
    EXPECT_LE(relative_error(spd::inv(pa).matrix() * a, Matrix::Identity(d, d)), 1e-9);
    EXPECT_LE(relative_error(spd::inv_sqrt(pa).matrix() * spd::sqrt(pa).matrix(), Matrix::Identity(d, d)), 1e-9);
    EXPECT_NEAR(spd::logdet(a), std::log(a.determinant()), 1e-9 * std::max(1.0, std::abs(spd::logdet(a))));
  }
}

TEST(Geodesic, KnownPoints) {
  const SPDMatrix a(diag({1, 1}));
  const SPDMatrix b(diag({16, 16}));
  EXPECT_TRUE(spd::geodesic(a, b, 0.5).matrix().isApprox(diag({4, 4}), 1e-14));
  Rng rng(4);
  const SPDMatrix c(rng.spd(4));
  EXPECT_LE(relative_error(spd::geodesic(c, c, 0.3).matrix(), c.matrix()), 1e-12);
  EXPECT_THROW(spd::GeodesicSegment(a, b).at(1.5), RangeError);
  EXPECT_THROW(spd::GeodesicSegment(a, b).at(-0.1), RangeError);
}

TEST(Geodesic, EndpointsAreExact) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = rng.integer(1, 6);
    const SPDMatrix a(rng.spd(d, 1e4));
    const SPDMatrix b(rng.spd(d, 1e4));
    const spd::GeodesicSegment seg(a, b);
    EXPECT_LE(relative_error(seg.at(0.0).matrix(), a.matrix()), 1e-10);
    EXPECT_LE(relative_error(seg.at(1.0).matrix(), b.matrix()), 1e-10);
  }
}

TEST(Geodesic, MatchesCholeskyCongruence) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = rng.integer(1, 6);
    const Matrix a = rng.spd(d, 1e3);
    const Matrix b = rng.spd(d, 1e3);
    const double t = rng.uniform();
    EXPECT_LE(relative_error(spd::geodesic(SPDMatrix(a), SPDMatrix(b), t).matrix(),
                             testing::cholesky_geodesic(a, b, t)),
              1e-9);
  }
}

TEST(GeometricMean, SolvesRiccatiEquation) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = rng.integer(1, 6);
    const Matrix a = rng.spd(d, 1e3);
    const Matrix b = rng.spd(d, 1e3);
    const Matrix g = spd::geometric_mean(SPDMatrix(a), SPDMatrix(b)).matrix();
    EXPECT_LE(testing::riccati_residual(g, a, b), 1e-9);
    EXPECT_LE(relative_error(g, spd::geodesic(SPDMatrix(a), SPDMatrix(b), 0.5).matrix()), 1e-12);
  }
}

TEST(GeometricMean, SpecialCases) {
  Rng rng(8);
  const SPDMatrix a(rng.spd(3));
  EXPECT_LE(relative_error(spd::geometric_mean(a, a).matrix(), a.matrix()), 1e-12);
  EXPECT_LE(relative_error(spd::geometric_mean(SPDMatrix::identity(3), a).matrix(), spd::sqrt(a).matrix()), 1e-12);
}

TEST(GeometricMean, InverseCommutesWithGeodesic) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = rng.integer(1, 6);
    const SPDMatrix a(rng.spd(d, 1e3));
    const SPDMatrix b(rng.spd(d, 1e3));
    const double t = rng.uniform();
    const Matrix lhs = spd::inv(spd::geodesic(a, b, t)).matrix();
    const Matrix rhs = spd::geodesic(spd::inv(a), spd::inv(b), t).matrix();
    EXPECT_LE(relative_error(lhs, rhs), 1e-9);
  }
}

TEST(GeometricMean, CongruenceInvariance) {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = rng.integer(1, 6);
    const Matrix a = rng.spd(d, 100);
    const Matrix b = rng.spd(d, 100);
    const Matrix c = rng.invertible(d);
    const Matrix lhs = c.transpose() * spd::geometric_mean(SPDMatrix(a), SPDMatrix(b)).matrix() * c;
    const Matrix rhs = spd::geometric_mean(SPDMatrix(spd::symmetrize(c.transpose() * a * c)),
                                           SPDMatrix(spd::symmetrize(c.transpose() * b * c)))
                           .matrix();
    EXPECT_LE(relative_error(lhs, rhs), 1e-8);
  }
}

TEST(GeometricMean, AmGmOperatorInequality) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = rng.integer(1, 6);
    const SPDMatrix ai = spd::inv(SPDMatrix(rng.spd(d, 1e3)));
    const SPDMatrix bi = spd::inv(SPDMatrix(rng.spd(d, 1e3)));
    const Matrix gm = spd::geometric_mean(ai, bi).matrix();
    const Matrix am = 0.5 * (ai.matrix() + bi.matrix());
    EXPECT_TRUE(spd::loewner_geq(am, gm, 1e-9));
  }
}

TEST(Distance, KnownValues) {
  Rng rng(12);
  const SPDMatrix a(rng.spd(4));
  EXPECT_NEAR(spd::distance(a, a), 0.0, 1e-12);
  EXPECT_NEAR(spd::distance(SPDMatrix::identity(2), SPDMatrix(diag({std::exp(2.0), 1.0}))), 2.0, 1e-14);
}

TEST(Distance, MatchesGeneralizedEigenvalues) {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = rng.integer(1, 6);
    const Matrix a = rng.spd(d, 1e3);
    const Matrix b = rng.spd(d, 1e3);
    const double want = testing::generalized_eig_distance(a, b);
    EXPECT_NEAR(spd::distance(SPDMatrix(a), SPDMatrix(b)), want, 1e-9 * std::max(1.0, want));
  }
}

TEST(Distance, MetricAxiomsAndCongruenceInvariance) {
  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = rng.integer(1, 5);
    const SPDMatrix a(rng.spd(d, 100));
    const SPDMatrix b(rng.spd(d, 100));
    const SPDMatrix c(rng.spd(d, 100));
    const double ab = spd::distance(a, b);
    EXPECT_NEAR(ab, spd::distance(b, a), 1e-8);
    EXPECT_LE(ab, spd::distance(a, c) + spd::distance(c, b) + 1e-8);
    const Matrix m = rng.invertible(d);
    const SPDMatrix ma(spd::symmetrize(m.transpose() * a.matrix() * m));
    const SPDMatrix mb(spd::symmetrize(m.transpose() * b.matrix() * m));
    EXPECT_NEAR(spd::distance(ma, mb), ab, 1e-8 * std::max(1.0, ab));
  }
}

TEST(LoewnerOrder, KnownCases) {
  EXPECT_TRUE(spd::loewner_geq(2.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2)));
  EXPECT_FALSE(spd::loewner_geq(diag({2, 0.5}), Matrix::Identity(2, 2)));
  Rng rng(15);
  const Matrix a = rng.spd(3);
  EXPECT_TRUE(spd::loewner_geq(a, a));
}

TEST(RandomSpd, RespectsConditionBoundAndSeed) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SPDMatrix m = spd::random_spd(4, 1e4, seed);
    const double cond = testing::lambda_max(m.matrix()) / (1.0 / testing::lambda_max(m.matrix().inverse()));
    EXPECT_LE(cond, 1e4 * (1 + 1e-9));
    EXPECT_EQ(m.matrix(), spd::random_spd(4, 1e4, seed).matrix());
  }
  const SPDMatrix one = spd::random_spd(1, 10, 3);
  EXPECT_GT(one.matrix()(0, 0), 0.0);
}

}  // namespace
}  // namespace geocert
