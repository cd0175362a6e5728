#include "geocert/spd.hpp"

#include "geocert/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace geocert::spd {

namespace {

std::string shape_of(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

double pd_threshold(double lambda_max) {
  return std::max(kPdRelTol * std::abs(lambda_max), kPdAbsFloor);
}

}  // namespace

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw ShapeError(std::string(what) + " must be square and non-empty, got " +
                     shape_of(m));
  if (!m.allFinite()) throw NumericError(std::string(what) + " has non-finite entries");
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * std::max(scale, 1e-300))
    throw ShapeError(std::string(what) + " is not symmetric (max asymmetry " +
                     std::to_string(asym) + ")");
}

EigenPair sym_eig(const Matrix& m) {
  require_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m));
  if (solver.info() != Eigen::Success)
    throw NumericError("symmetric eigendecomposition failed");
  // Eigen returns ascending order.
  const Eigen::Index d = m.rows();
  EigenPair out{Matrix(d, d), Vector(d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    out.lambda(i) = solver.eigenvalues()(d - 1 - i);
    out.q.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  return out;
}

Matrix spectral_apply(const EigenPair& e, const std::function<double(double)>& f) {
  Vector fl = e.lambda.unaryExpr(f);
  if (!fl.allFinite()) throw NumericError("spectral function produced non-finite values");
  Matrix out = e.q * fl.asDiagonal() * e.q.transpose();
  return symmetrize(out);
}

SPDMatrix::SPDMatrix(const Matrix& m) {
  auto e = std::make_shared<EigenPair>(sym_eig(m));
  const double lmin = e->lambda(e->lambda.size() - 1);
  if (!(lmin > pd_threshold(e->lambda(0))))
    throw DomainError("matrix is not positive definite (smallest eigenvalue " +
                      std::to_string(lmin) + ")");
  m_ = symmetrize(m);
  eig_ = std::move(e);
}

SPDMatrix SPDMatrix::identity(Eigen::Index d) { return SPDMatrix(Matrix::Identity(d, d)); }

bool is_spd(const Matrix& m) {
  try {
    SPDMatrix tmp(m);
    return true;
  } catch (const Error&) {
    return false;
  }
}

SPDMatrix sqrt(const SPDMatrix& m) {
  return SPDMatrix(spectral_apply(m.eig(), [](double x) { return std::sqrt(x); }));
}

SPDMatrix inv_sqrt(const SPDMatrix& m) {
  return SPDMatrix(spectral_apply(m.eig(), [](double x) { return 1.0 / std::sqrt(x); }));
}

Matrix log(const SPDMatrix& m) {
  return spectral_apply(m.eig(), [](double x) { return std::log(x); });
}

SPDMatrix exp_sym(const Matrix& s) {
  return SPDMatrix(spectral_apply(sym_eig(s), [](double x) { return std::exp(x); }));
}

SPDMatrix pow(const SPDMatrix& m, double t) {
  return SPDMatrix(spectral_apply(m.eig(), [t](double x) { return std::pow(x, t); }));
}

SPDMatrix inv(const SPDMatrix& m) {
  return SPDMatrix(spectral_apply(m.eig(), [](double x) { return 1.0 / x; }));
}

Matrix matrix_function(const Matrix& m, MatrixFunction f, double exponent) {
  if (f == MatrixFunction::ExpSym) return exp_sym(m).matrix();
  SPDMatrix x = [&] {
    try {
      return SPDMatrix(m);
    } catch (const DomainError& e) {
      throw DomainError(std::string("matrix function requires an SPD argument: ") + e.what());
    }
  }();
  switch (f) {
    case MatrixFunction::Sqrt: return sqrt(x).matrix();
    case MatrixFunction::Log: return log(x);
    case MatrixFunction::Pow: return pow(x, exponent).matrix();
    case MatrixFunction::Inv: return inv(x).matrix();
    case MatrixFunction::ExpSym: break;
  }
  throw DomainError("unknown matrix function");
}

GeodesicSegment::GeodesicSegment(const SPDMatrix& a, const SPDMatrix& b) {
  if (a.dim() != b.dim())
    throw ShapeError("geodesic endpoints have different dimensions");
  const EigenPair& ea = a.eig();
  a_half_ = spectral_apply(ea, [](double x) { return std::sqrt(x); });
  Matrix a_mhalf = spectral_apply(ea, [](double x) { return 1.0 / std::sqrt(x); });
  inner_ = sym_eig(symmetrize(a_mhalf * b.matrix() * a_mhalf));
}

Matrix GeodesicSegment::raw_at(double t) const {
  if (!(t >= 0.0 && t <= 1.0))
    throw RangeError("geodesic parameter t must lie in [0, 1], got " + std::to_string(t));
  Matrix middle = spectral_apply(inner_, [t](double x) { return std::pow(x, t); });
  return symmetrize(a_half_ * middle * a_half_);
}

SPDMatrix GeodesicSegment::at(double t) const { return SPDMatrix(raw_at(t)); }

SPDMatrix geodesic(const SPDMatrix& a, const SPDMatrix& b, double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw RangeError("geodesic parameter t must lie in [0, 1], got " + std::to_string(t));
  return GeodesicSegment(a, b).at(t);
}

SPDMatrix geometric_mean(const SPDMatrix& a, const SPDMatrix& b) { return geodesic(a, b, 0.5); }

double distance(const SPDMatrix& a, const SPDMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("distance arguments have different dimensions");
  Matrix b_mhalf = spectral_apply(b.eig(), [](double x) { return 1.0 / std::sqrt(x); });
  EigenPair e = sym_eig(symmetrize(b_mhalf * a.matrix() * b_mhalf));
  if (!(e.lambda.minCoeff() > 0.0)) throw NumericError("distance: congruence lost definiteness");
  return e.lambda.array().log().matrix().norm();
}

bool loewner_geq(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("loewner_geq arguments have different shapes");
  Matrix diff = symmetrize(a - b);
  if (diff.cwiseAbs().maxCoeff() == 0.0) return true;
  EigenPair e = sym_eig(diff);
  const double norm2 = e.lambda.cwiseAbs().maxCoeff();
  return e.lambda(e.lambda.size() - 1) >= -tol * norm2;
}

SPDMatrix random_spd(Eigen::Index d, double cond_max, std::uint64_t seed) {
  if (d < 1) throw ConfigError("random_spd: dimension must be >= 1");
  if (!(cond_max >= 1.0)) throw ConfigError("random_spd: cond_max must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double half = 0.5 * std::log(cond_max);
  std::uniform_real_distribution<double> loglam(-half, half);

  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Vector lambda(d);
  for (Eigen::Index i = 0; i < d; ++i) lambda(i) = std::exp(loglam(rng));
  return SPDMatrix(symmetrize(q * lambda.asDiagonal() * q.transpose()));
}

double max_eigenvalue(const Matrix& m) { return sym_eig(m).lambda(0); }

double min_eigenvalue(const Matrix& m) {
  EigenPair e = sym_eig(m);
  return e.lambda(e.lambda.size() - 1);
}

double logdet(const Matrix& m) {
  require_symmetric(m);
  Eigen::LLT<Matrix> llt(symmetrize(m));
  if (llt.info() != Eigen::Success) throw DomainError("logdet: matrix is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace geocert::spd
