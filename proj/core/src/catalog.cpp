// Built-in atom catalog: signatures, parameter validation, metadata and
// reverse-mode derivatives.

#include "geocert/expression.hpp"

#include "geocert/errors.hpp"

#include <cmath>
#include <string>

namespace geocert {

namespace {

using spd::Matrix;
using spd::Vector;

constexpr double kRankTol = 1e-10;

const Matrix& mat_arg(std::span<const NumericArg> a, std::size_t i) { return std::get<Matrix>(a[i]); }
double num_arg(std::span<const NumericArg> a, std::size_t i) { return std::get<double>(a[i]); }
double scalar_cot(const Value& v) { return std::get<double>(v); }
const Matrix& matrix_cot(const Value& v) { return std::get<Matrix>(v); }

Matrix inverse_of(const Matrix& x) { return spd::inv(spd::SPDMatrix(x)).matrix(); }

double param_number(std::span<const NumericArg* const> p, std::size_t i, const char* what) {
  if (const double* v = std::get_if<double>(p[i])) {
    if (!std::isfinite(*v)) throw InvalidConstant(std::string(what) + " must be finite");
    return *v;
  }
  throw SignatureError(std::string(what) + " must be a number");
}

int param_k(std::span<const NumericArg* const> p, std::size_t i, Eigen::Index d) {
  const double k = param_number(p, i, "k");
  if (k != std::floor(k) || k < 1 || k > static_cast<double>(d))
    throw InvalidConstant("k must be an integer in [1, " + std::to_string(d) + "]");
  return static_cast<int>(k);
}

double param_p(std::span<const NumericArg* const> p, std::size_t i) {
  const double v = param_number(p, i, "p");
  if (!(v >= 1.0)) throw InvalidConstant("p must be >= 1");
  return v;
}

int param_r(std::span<const NumericArg* const> p, std::size_t i) {
  const double r = param_number(p, i, "r");
  if (r != 1.0 && r != -1.0) throw InvalidConstant("r must be -1 or +1");
  return static_cast<int>(r);
}

double smallest_singular_ratio(const Matrix& b) {
  Eigen::JacobiSVD<Matrix> svd(b);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

void require_psd(const Matrix& m, const char* what) {
  try {
    spd::require_symmetric(m, what);
  } catch (const Error& e) {
    throw InvalidConstant(e.what());
  }
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  if (spd::min_eigenvalue(m) < -kRankTol * scale)
    throw InvalidConstant(std::string(what) + " must be positive semidefinite");
}

AtomMetadata base_metadata(const AtomSignature& s, CompositionRule rule = CompositionRule::Standard) {
  AtomMetadata m;
  m.sign = s.sign;
  m.gcurv = s.gcurv;
  m.gmono = s.gmono;
  m.ecurv = s.ecurv;
  m.rule = rule;
  m.nominal_sign = s.nominal_sign;
  return m;
}

// Gradient of a spectral function sum_i f(lambda_i) given per-eigenvalue
// derivatives (eigenvalues descending).
Matrix spectral_gradient(const spd::EigenPair& e, const Vector& dlambda) {
  return spd::symmetrize(e.q * dlambda.asDiagonal() * e.q.transpose());
}

// Gradient of ||log(A^{-1/2} X A^{-1/2})||_F with respect to X.
Matrix distance_gradient(const Matrix& x, const Matrix& a) {
  const spd::SPDMatrix as(a);
  const Matrix a_mhalf = spd::inv_sqrt(as).matrix();
  const spd::EigenPair s = spd::sym_eig(spd::symmetrize(a_mhalf * x * a_mhalf));
  const Vector logs = s.lambda.array().log().matrix();
  const double dist = logs.norm();
  if (dist == 0.0) return Matrix::Zero(x.rows(), x.cols());
  const Vector weights = (logs.array() / s.lambda.array()).matrix() / dist;
  return spd::symmetrize(a_mhalf * spectral_gradient(s, weights) * a_mhalf);
}

struct Builder {
  AtomRegistry& reg;

  void add(AtomSignature sig, VectorJacobianProduct vjp, ShapeRule shape = {},
           MetadataRule refine = {}, CompositionRule rule = CompositionRule::Standard,
           std::optional<Sign> domain_sign = std::nullopt) {
    AtomDefinition def;
    const std::string id = sig.id;
    def.signature = std::move(sig);
    def.evaluate = [id](std::span<const NumericArg> a) { return spd::eval_atom(id, a); };
    def.vjp = std::move(vjp);
    def.shape = std::move(shape);
    def.refine = std::move(refine);
    def.rule = rule;
    def.domain_sign = domain_sign;
    reg.register_atom(std::move(def));
  }
};

AtomSignature scalar_sig(std::string id, std::vector<ArgKind> args, Sign s, GCurvature g,
                         GMonotonicity m, ECurvature e) {
  return AtomSignature{std::move(id), std::move(args), ResultKind::Scalar, s, g, m, e};
}

AtomSignature matrix_sig(std::string id, std::vector<ArgKind> args, GMonotonicity m, ECurvature e) {
  return AtomSignature{std::move(id), std::move(args), ResultKind::Matrix, Sign::Positive,
                       GCurvature::GConvex, m, e};
}

void add_scalar_valued(Builder& b) {
  using enum ArgKind;
  using G = GCurvature;
  using M = GMonotonicity;
  using E = ECurvature;

  AtomSignature logdet = scalar_sig("logdet", {Manifold}, Sign::Positive, G::GLinear, M::GIncreasing, E::Concave);
  logdet.nominal_sign = true;
  b.add(std::move(logdet),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          return {Matrix(scalar_cot(c) * inverse_of(mat_arg(a, 0)))};
        });

  b.add(scalar_sig("tr", {Manifold}, Sign::Positive, G::GConvex, M::GIncreasing, E::Affine),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const auto d = mat_arg(a, 0).rows();
          return {Matrix(scalar_cot(c) * Matrix::Identity(d, d))};
        });

  b.add(scalar_sig("sum", {Manifold}, Sign::Positive, G::GConvex, M::GIncreasing, E::Affine),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const auto d = mat_arg(a, 0).rows();
          return {Matrix(Matrix::Constant(d, d, scalar_cot(c)))};
        });

  // Not monotone in the Loewner order: sdivergence(Y, Y) = 0 < sdivergence(Y/2, Y).
  b.add(scalar_sig("sdivergence", {Manifold, Manifold}, Sign::Positive, G::GConvex, M::GAnyMono,
                   E::UnknownCurvature),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const Matrix& x = mat_arg(a, 0);
          const Matrix& y = mat_arg(a, 1);
          const Matrix mid = inverse_of(spd::symmetrize(x + y));
          const double s = scalar_cot(c);
          return {Matrix(s * (mid - 0.5 * inverse_of(x))), Matrix(s * (mid - 0.5 * inverse_of(y)))};
        });

  b.add(scalar_sig("distance", {Manifold, Manifold}, Sign::Positive, G::GConvex, M::GAnyMono,
                   E::UnknownCurvature),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const Matrix& x = mat_arg(a, 0);
          const Matrix& y = mat_arg(a, 1);
          const double s = scalar_cot(c);
          return {Matrix(s * distance_gradient(x, y)), Matrix(s * distance_gradient(y, x))};
        });

  b.add(scalar_sig("quad_form", {VectorParam, Manifold}, Sign::Positive, G::GConvex,
                   M::GIncreasing, E::Affine),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const Vector& h = std::get<Vector>(a[0]);
          return {Matrix(scalar_cot(c) * h * h.transpose())};
        },
        [](Eigen::Index d, std::span<const NumericArg* const> p) -> Eigen::Index {
          const Vector& h = std::get<Vector>(*p[0]);
          if (h.size() != d) throw SignatureError("quad_form: vector length must equal " + std::to_string(d));
          if (!h.allFinite() || h.isZero(0.0)) throw InvalidConstant("quad_form: vector must be finite and nonzero");
          return 0;
        });

  b.add(scalar_sig("eigmax", {Manifold}, Sign::Positive, G::GConvex, M::GIncreasing, E::Convex),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const spd::EigenPair e = spd::sym_eig(mat_arg(a, 0));
          const Vector v = e.q.col(0);
          return {Matrix(scalar_cot(c) * v * v.transpose())};
        });

  b.add(scalar_sig("log_quad_form", {VectorListParam, Manifold}, Sign::AnySign, G::GConvex,
                   M::GIncreasing, E::UnknownCurvature),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const Matrix& x = mat_arg(a, 1);
          Matrix outer = Matrix::Zero(x.rows(), x.cols());
          double s = 0.0;
          for (const Vector& h : spd::as_vector_list(a[0])) {
            outer += h * h.transpose();
            s += h.dot(x * h);
          }
          return {Matrix(scalar_cot(c) / s * outer)};
        },
        [](Eigen::Index d, std::span<const NumericArg* const> p) -> Eigen::Index {
          const auto hs = spd::as_vector_list(*p[0]);
          if (hs.empty()) throw InvalidConstant("log_quad_form: needs at least one vector");
          bool any_nonzero = false;
          for (const Vector& h : hs) {
            if (h.size() != d)
              throw SignatureError("log_quad_form: vectors must have length " + std::to_string(d));
            if (!h.allFinite()) throw InvalidConstant("log_quad_form: vectors must be finite");
            any_nonzero = any_nonzero || !h.isZero(0.0);
          }
          if (!any_nonzero) throw InvalidConstant("log_quad_form: all vectors are zero");
          return 0;
        });

  b.add(scalar_sig("eigsummax", {Manifold, ScalarParam}, Sign::Positive, G::GConvex,
                   M::GIncreasing, E::Convex),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const spd::EigenPair e = spd::sym_eig(mat_arg(a, 0));
          const auto k = static_cast<Eigen::Index>(num_arg(a, 1));
          Vector w = Vector::Zero(e.lambda.size());
          w.head(k).setConstant(scalar_cot(c));
          return {spectral_gradient(e, w)};
        },
        [](Eigen::Index d, std::span<const NumericArg* const> p) -> Eigen::Index {
          param_k(p, 0, d);
          return 0;
        });

  b.add(scalar_sig("schatten_norm", {Manifold, ScalarParam}, Sign::Positive, G::GConvex,
                   M::GIncreasing, E::Convex),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const spd::EigenPair e = spd::sym_eig(mat_arg(a, 0));
          const double p = num_arg(a, 1);
          const Vector mu = e.lambda / e.lambda(0);
          const double total = mu.array().pow(p).sum();
          const Vector w = scalar_cot(c) * std::pow(total, 1.0 / p - 1.0) * mu.array().pow(p - 1.0).matrix();
          return {spectral_gradient(e, w)};
        },
        [](Eigen::Index, std::span<const NumericArg* const> p) -> Eigen::Index {
          param_p(p, 0);
          return 0;
        });

  b.add(scalar_sig("sum_log_eigmax", {Manifold, ScalarParam}, Sign::AnySign, G::GConvex,
                   M::GIncreasing, E::UnknownCurvature),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const spd::EigenPair e = spd::sym_eig(mat_arg(a, 0));
          const auto k = static_cast<Eigen::Index>(num_arg(a, 1));
          Vector w = Vector::Zero(e.lambda.size());
          for (Eigen::Index i = 0; i < k; ++i) w(i) = scalar_cot(c) / e.lambda(i);
          return {spectral_gradient(e, w)};
        },
        [](Eigen::Index d, std::span<const NumericArg* const> p) -> Eigen::Index {
          param_k(p, 0, d);
          return 0;
        });

  // Only the nonnegative part of the log-spectrum is raised to p, which keeps
  // the terms convex and nondecreasing; the values are nonnegative.
  b.add(scalar_sig("sum_pow_log_eigmax", {Manifold, ScalarParam, ScalarParam}, Sign::Positive,
                   G::GConvex, M::GIncreasing, E::UnknownCurvature),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const spd::EigenPair e = spd::sym_eig(mat_arg(a, 0));
          const auto k = static_cast<Eigen::Index>(num_arg(a, 1));
          const double p = num_arg(a, 2);
          Vector w = Vector::Zero(e.lambda.size());
          for (Eigen::Index i = 0; i < k; ++i) {
            const double l = std::log(e.lambda(i));
            if (l > 0.0) w(i) = scalar_cot(c) * p * std::pow(l, p - 1.0) / e.lambda(i);
          }
          return {spectral_gradient(e, w)};
        },
        [](Eigen::Index d, std::span<const NumericArg* const> p) -> Eigen::Index {
          param_k(p, 0, d);
          param_p(p, 1);
          return 0;
        });

  b.add(scalar_sig("entrywise_l1", {Manifold}, Sign::Positive, G::GUnknown, M::GAnyMono, E::Convex),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const Matrix s = mat_arg(a, 0).unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
          return {Matrix(scalar_cot(c) * s)};
        });
}

void add_matrix_valued(Builder& b) {
  using enum ArgKind;
  using M = GMonotonicity;
  using E = ECurvature;

  b.add(matrix_sig("conjugation", {Manifold, MatrixParam}, M::GIncreasing, E::Affine),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const Matrix& bm = mat_arg(a, 1);
          return {spd::symmetrize(bm * matrix_cot(c) * bm.transpose())};
        },
        [](Eigen::Index d, std::span<const NumericArg* const> p) -> Eigen::Index {
          const Matrix& bm = std::get<Matrix>(*p[0]);
          if (bm.rows() != d)
            throw SignatureError("conjugation: B must have " + std::to_string(d) + " rows");
          if (!bm.allFinite()) throw InvalidConstant("conjugation: B must be finite");
          if (bm.cols() > bm.rows() || smallest_singular_ratio(bm) <= kRankTol)
            throw InvalidConstant("conjugation: B must have full column rank");
          return bm.cols();
        });

  b.add(matrix_sig("adjoint", {Manifold}, M::GIncreasing, E::Affine),
        [](std::span<const NumericArg>, const Value& c) -> std::vector<Value> {
          return {Matrix(matrix_cot(c).transpose())};
        });

  AtomSignature inv_sig = matrix_sig("inv", {Manifold}, M::GDecreasing, E::Convex);
  b.add(std::move(inv_sig),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const Matrix xi = inverse_of(mat_arg(a, 0));
          return {spd::symmetrize(-xi * matrix_cot(c) * xi)};
        },
        {}, {}, CompositionRule::Inverse);

  b.add(matrix_sig("hadamard_product", {Manifold, MatrixParam}, M::GIncreasing, E::Affine),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          return {spd::symmetrize(mat_arg(a, 1).cwiseProduct(matrix_cot(c)))};
        },
        [](Eigen::Index d, std::span<const NumericArg* const> p) -> Eigen::Index {
          const Matrix& m = std::get<Matrix>(*p[0]);
          if (m.rows() != d || m.cols() != d)
            throw SignatureError("hadamard_product: M must be " + std::to_string(d) + "x" +
                                 std::to_string(d));
          require_psd(m, "hadamard_product: M");
          if (!(m.diagonal().array() > 0.0).all())
            throw InvalidConstant("hadamard_product: M must have a strictly positive diagonal");
          return d;
        });

  b.add(matrix_sig("diag_matrix", {Manifold}, M::GIncreasing, E::Affine),
        [](std::span<const NumericArg>, const Value& c) -> std::vector<Value> {
          return {Matrix(matrix_cot(c).diagonal().asDiagonal())};
        });

  AtomSignature pa = matrix_sig("positive_affine", {Manifold, MatrixListParam, MatrixParam, ScalarParam},
                                M::GIncreasing, E::Affine);
  MetadataRule pa_refine = [pa](std::span<const NumericArg* const> p) {
    AtomMetadata m = base_metadata(pa);
    if (param_r(p, 2) == -1) {
      m.gmono = GMonotonicity::GDecreasing;
      m.ecurv = ECurvature::UnknownCurvature;
    }
    return m;
  };
  b.add(std::move(pa),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const Matrix& x = mat_arg(a, 0);
          const int r = static_cast<int>(num_arg(a, 3));
          Matrix g = Matrix::Zero(x.rows(), x.cols());
          for (const Matrix& y : spd::as_matrix_list(a[1])) g += y * matrix_cot(c) * y.transpose();
          if (r == -1) {
            const Matrix xi = inverse_of(x);
            g = -xi * g * xi;
          }
          return {spd::symmetrize(g)};
        },
        [](Eigen::Index d, std::span<const NumericArg* const> p) -> Eigen::Index {
          const auto ys = spd::as_matrix_list(*p[0]);
          const Matrix& bm = std::get<Matrix>(*p[1]);
          param_r(p, 2);
          if (ys.empty()) throw InvalidConstant("positive_affine: needs at least one Y");
          if (bm.rows() != bm.cols()) throw SignatureError("positive_affine: B must be square");
          const Eigen::Index m = bm.rows();
          require_psd(bm, "positive_affine: B");
          Matrix gram = bm;
          for (const Matrix& y : ys) {
            if (y.rows() != d || y.cols() != m)
              throw SignatureError("positive_affine: each Y must be " + std::to_string(d) + "x" +
                                   std::to_string(m));
            if (!y.allFinite()) throw InvalidConstant("positive_affine: Y must be finite");
            gram += y.transpose() * y;
          }
          // B + sum Y^T X Y is PD for every PD X iff B + sum Y^T Y is PD.
          if (!spd::is_spd(spd::symmetrize(gram)))
            throw InvalidConstant("positive_affine: B + sum Y^T Y must be positive definite");
          return m;
        },
        std::move(pa_refine));
}

void add_scalar_functions(Builder& b) {
  using enum ArgKind;
  using G = GCurvature;
  using M = GMonotonicity;
  using E = ECurvature;

  b.add(scalar_sig("exp", {Scalar}, Sign::Positive, G::GConvex, M::GIncreasing, E::Convex),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          return {scalar_cot(c) * std::exp(num_arg(a, 0))};
        });

  b.add(scalar_sig("log", {Scalar}, Sign::AnySign, G::GConcave, M::GIncreasing, E::Concave),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          return {scalar_cot(c) / num_arg(a, 0)};
        },
        {}, {}, CompositionRule::Standard, Sign::Positive);

  b.add(scalar_sig("neg_log", {Scalar}, Sign::AnySign, G::GConvex, M::GDecreasing, E::Convex),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          return {-scalar_cot(c) / num_arg(a, 0)};
        },
        {}, {}, CompositionRule::Standard, Sign::Positive);

  b.add(scalar_sig("pow", {Scalar, ScalarParam}, Sign::Positive, G::GConvex, M::GIncreasing, E::Convex),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const double x = num_arg(a, 0);
          const double p = num_arg(a, 1);
          return {scalar_cot(c) * p * std::pow(x, p - 1.0)};
        },
        [](Eigen::Index, std::span<const NumericArg* const> p) -> Eigen::Index {
          param_p(p, 0);
          return 0;
        },
        {}, CompositionRule::Standard, Sign::Positive);

  b.add(scalar_sig("abs", {Scalar}, Sign::Positive, G::GConvex, M::GAnyMono, E::Convex),
        [](std::span<const NumericArg> a, const Value& c) -> std::vector<Value> {
          const double x = num_arg(a, 0);
          return {scalar_cot(c) * double((x > 0) - (x < 0))};
        });
}

}  // namespace

AtomRegistry AtomRegistry::with_catalog() {
  AtomRegistry reg;
  Builder b{reg};
  add_scalar_valued(b);
  add_matrix_valued(b);
  add_scalar_functions(b);
  return reg;
}

}  // namespace geocert
