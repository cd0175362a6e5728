#pragma once

// Dense SPD linear algebra on the affine-invariant manifold. Every matrix
// function is computed from a real symmetric eigendecomposition.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace geocert::spd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative asymmetry gate applied before every eigendecomposition.
inline constexpr double kSymmetryTol = 1e-12;
/// Default positive-definiteness tolerance relative to the largest eigenvalue.
inline constexpr double kPdRelTol = 1e-10;
/// Absolute floor of the positive-definiteness tolerance.
inline constexpr double kPdAbsFloor = 1e-300;

/// Orthogonal eigenvectors (columns of q) and eigenvalues sorted descending.
struct EigenPair {
  Matrix q;
  Vector lambda;
};

/// Throws ShapeError when `m` is not square or not symmetric within
/// kSymmetryTol relative to its largest entry.
void require_symmetric(const Matrix& m, const char* what = "matrix");

/// Eigendecomposition of a symmetric matrix; eigenvalues sorted descending.
/// The input is symmetrized after the asymmetry gate.
EigenPair sym_eig(const Matrix& m);

/// Q * diag(f(lambda)) * Q^T.
Matrix spectral_apply(const EigenPair& e, const std::function<double(double)>& f);

/// Validated symmetric positive definite matrix. Construction rejects
/// inputs failing the symmetry gate or whose smallest eigenvalue is not above
/// max(kPdRelTol * lambda_max, kPdAbsFloor). Values are immutable and carry
/// their eigendecomposition.
class SPDMatrix {
 public:
  explicit SPDMatrix(const Matrix& m);

  static SPDMatrix identity(Eigen::Index d);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  const EigenPair& eig() const { return *eig_; }
  double lambda_max() const { return eig_->lambda(0); }
  double lambda_min() const { return eig_->lambda(eig_->lambda.size() - 1); }

  operator const Matrix&() const { return m_; }

 private:
  Matrix m_;
  std::shared_ptr<const EigenPair> eig_;
};

/// True when `m` would pass SPDMatrix validation.
bool is_spd(const Matrix& m);

// Matrix functions. log/sqrt/pow/inv require SPD input (DomainError
// otherwise); exp_sym accepts any symmetric matrix.
SPDMatrix sqrt(const SPDMatrix& m);
SPDMatrix inv_sqrt(const SPDMatrix& m);
Matrix log(const SPDMatrix& m);
SPDMatrix exp_sym(const Matrix& s);
SPDMatrix pow(const SPDMatrix& m, double t);
SPDMatrix inv(const SPDMatrix& m);

enum class MatrixFunction { Sqrt, Log, ExpSym, Pow, Inv };

/// Generic entry point over the functions above; `exponent` is used by Pow.
Matrix matrix_function(const Matrix& m, MatrixFunction f, double exponent = 1.0);

/// A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}, precomputed so that many t values
/// can be evaluated cheaply.
class GeodesicSegment {
 public:
  GeodesicSegment(const SPDMatrix& a, const SPDMatrix& b);

  /// Point at parameter t in [0, 1]; RangeError otherwise.
  SPDMatrix at(double t) const;
  Matrix raw_at(double t) const;

 private:
  Matrix a_half_;
  EigenPair inner_;
};

SPDMatrix geodesic(const SPDMatrix& a, const SPDMatrix& b, double t);
SPDMatrix geometric_mean(const SPDMatrix& a, const SPDMatrix& b);

/// Affine-invariant distance ||log(B^{-1/2} A B^{-1/2})||_F.
double distance(const SPDMatrix& a, const SPDMatrix& b);

/// True iff lambda_min(A - B) >= -tol * ||A - B||_2 (true when A == B).
bool loewner_geq(const Matrix& a, const Matrix& b, double tol = 1e-12);

/// Q diag(lambda) Q^T with Q Haar-like orthogonal and log(lambda) uniform on
/// [-log(cond_max)/2, log(cond_max)/2]. Deterministic given the seed.
SPDMatrix random_spd(Eigen::Index d, double cond_max, std::uint64_t seed);

/// Largest / smallest eigenvalue of a symmetric matrix.
double max_eigenvalue(const Matrix& m);
double min_eigenvalue(const Matrix& m);

/// log det via Cholesky; DomainError when the matrix is not PD.
double logdet(const Matrix& m);

Matrix symmetrize(const Matrix& m);

}  // namespace geocert::spd
