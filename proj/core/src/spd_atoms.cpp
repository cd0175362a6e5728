#include "geocert/spd_atoms.hpp"

#include "geocert/errors.hpp"

#include <cmath>
#include <string>

namespace geocert::spd {

namespace {

void require_pd(const Matrix& x, std::string_view atom) {
  require_symmetric(x, "atom argument");
  Eigen::LLT<Matrix> llt(symmetrize(x));
  if (llt.info() != Eigen::Success)
    throw DomainError(std::string(atom) + ": argument is not positive definite");
}

void require_k(const Matrix& x, int k, std::string_view atom) {
  if (k < 1 || k > x.rows())
    throw DomainError(std::string(atom) + ": k must lie in [1, " + std::to_string(x.rows()) +
                      "], got " + std::to_string(k));
}

Vector eigenvalues_desc(const Matrix& x) { return sym_eig(x).lambda; }

template <class T>
const T& get_arg(std::span<const NumericArg> args, std::size_t i, std::string_view atom) {
  if (i >= args.size())
    throw SignatureError(std::string(atom) + ": missing argument " + std::to_string(i + 1));
  if (const T* v = std::get_if<T>(&args[i])) return *v;
  throw SignatureError(std::string(atom) + ": argument " + std::to_string(i + 1) +
                       " has the wrong kind");
}

int get_int(std::span<const NumericArg> args, std::size_t i, std::string_view atom) {
  const double v = get_arg<double>(args, i, atom);
  if (v != std::floor(v))
    throw DomainError(std::string(atom) + ": argument " + std::to_string(i + 1) +
                      " must be an integer");
  return static_cast<int>(v);
}

void require_arity(std::span<const NumericArg> args, std::size_t n, std::string_view atom) {
  if (args.size() != n)
    throw SignatureError(std::string(atom) + ": expected " + std::to_string(n) +
                         " arguments, got " + std::to_string(args.size()));
}

}  // namespace

double logdet_atom(const Matrix& x) { return logdet(x); }

double trace(const Matrix& x) {
  require_pd(x, "tr");
  return x.trace();
}

double entry_sum(const Matrix& x) {
  require_pd(x, "sum");
  return x.sum();
}

double sdivergence(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) throw ShapeError("sdivergence: dimension mismatch");
  return logdet(0.5 * (x + y)) - 0.5 * (logdet(x) + logdet(y));
}

double distance_atom(const Matrix& x, const Matrix& y) {
  require_pd(x, "distance");
  require_pd(y, "distance");
  return distance(SPDMatrix(x), SPDMatrix(y));
}

double quad_form(const Vector& h, const Matrix& x) {
  require_pd(x, "quad_form");
  if (h.size() != x.rows()) throw ShapeError("quad_form: vector length mismatch");
  return h.dot(x * h);
}

double eigmax(const Matrix& x) {
  require_pd(x, "eigmax");
  return max_eigenvalue(x);
}

double log_quad_form(std::span<const Vector> hs, const Matrix& x) {
  require_pd(x, "log_quad_form");
  if (hs.empty()) throw DomainError("log_quad_form: needs at least one vector");
  double s = 0.0;
  for (const Vector& h : hs) {
    if (h.size() != x.rows()) throw ShapeError("log_quad_form: vector length mismatch");
    s += h.dot(x * h);
  }
  if (!(s > 0.0)) throw DomainError("log_quad_form: quadratic form is not positive");
  return std::log(s);
}

double eigsummax(const Matrix& x, int k) {
  require_pd(x, "eigsummax");
  require_k(x, k, "eigsummax");
  return eigenvalues_desc(x).head(k).sum();
}

double schatten_norm(const Matrix& x, double p) {
  require_pd(x, "schatten_norm");
  if (!(p >= 1.0)) throw DomainError("schatten_norm: p must be >= 1");
  Vector l = eigenvalues_desc(x);
  const double lmax = l(0);
  // Scale by the largest eigenvalue to avoid overflow for large p.
  return lmax * std::pow((l / lmax).array().pow(p).sum(), 1.0 / p);
}

double sum_log_eigmax(const Matrix& x, int k) {
  require_pd(x, "sum_log_eigmax");
  require_k(x, k, "sum_log_eigmax");
  return eigenvalues_desc(x).head(k).array().log().sum();
}

double sum_pow_log_eigmax(const Matrix& x, int k, double p) {
  require_pd(x, "sum_pow_log_eigmax");
  require_k(x, k, "sum_pow_log_eigmax");
  if (!(p >= 1.0)) throw DomainError("sum_pow_log_eigmax: p must be >= 1");
  Vector l = eigenvalues_desc(x);
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += std::pow(std::max(std::log(l(i)), 0.0), p);
  return s;
}

double entrywise_l1(const Matrix& x) {
  require_pd(x, "entrywise_l1");
  return x.cwiseAbs().sum();
}

Matrix conjugation(const Matrix& x, const Matrix& b) {
  require_pd(x, "conjugation");
  if (b.rows() != x.rows()) throw ShapeError("conjugation: B must have as many rows as X");
  return symmetrize(b.transpose() * x * b);
}

Matrix adjoint(const Matrix& x) {
  require_pd(x, "adjoint");
  return x.transpose();
}

Matrix inverse(const Matrix& x) {
  require_pd(x, "inv");
  return inv(SPDMatrix(x)).matrix();
}

Matrix hadamard_product(const Matrix& x, const Matrix& m) {
  require_pd(x, "hadamard_product");
  if (m.rows() != x.rows() || m.cols() != x.cols())
    throw ShapeError("hadamard_product: shape mismatch");
  return symmetrize(x.cwiseProduct(m));
}

Matrix diag_matrix(const Matrix& x) {
  require_pd(x, "diag_matrix");
  return Matrix(x.diagonal().asDiagonal());
}

Matrix positive_affine(const Matrix& x, std::span<const Matrix> ys, const Matrix& b, int r) {
  require_pd(x, "positive_affine");
  if (r != 1 && r != -1) throw DomainError("positive_affine: r must be -1 or +1");
  Matrix xr = r == 1 ? x : inv(SPDMatrix(x)).matrix();
  Matrix out = b;
  for (const Matrix& y : ys) {
    if (y.rows() != x.rows() || y.cols() != b.rows())
      throw ShapeError("positive_affine: Y_i must be d x m with B m x m");
    out += y.transpose() * xr * y;
  }
  return symmetrize(out);
}

std::vector<Vector> as_vector_list(const NumericArg& arg) {
  if (const auto* v = std::get_if<Vector>(&arg)) return {*v};
  if (const auto* l = std::get_if<std::vector<Vector>>(&arg)) return *l;
  if (const auto* m = std::get_if<Matrix>(&arg)) {
    std::vector<Vector> out;
    for (Eigen::Index j = 0; j < m->cols(); ++j) out.emplace_back(m->col(j));
    return out;
  }
  throw SignatureError("expected a vector, a matrix of column vectors, or a vector list");
}

std::vector<Matrix> as_matrix_list(const NumericArg& arg) {
  if (const auto* m = std::get_if<Matrix>(&arg)) return {*m};
  if (const auto* l = std::get_if<std::vector<Matrix>>(&arg)) return *l;
  throw SignatureError("expected a matrix or a matrix list");
}

Value eval_atom(std::string_view id, std::span<const NumericArg> args) {
  auto mat = [&](std::size_t i) -> const Matrix& { return get_arg<Matrix>(args, i, id); };
  auto num = [&](std::size_t i) { return get_arg<double>(args, i, id); };

  if (id == "logdet") { require_arity(args, 1, id); return logdet_atom(mat(0)); }
  if (id == "tr") { require_arity(args, 1, id); return trace(mat(0)); }
  if (id == "sum") { require_arity(args, 1, id); return entry_sum(mat(0)); }
  if (id == "sdivergence") { require_arity(args, 2, id); return sdivergence(mat(0), mat(1)); }
  if (id == "distance") { require_arity(args, 2, id); return distance_atom(mat(0), mat(1)); }
  if (id == "quad_form") {
    require_arity(args, 2, id);
    return quad_form(get_arg<Vector>(args, 0, id), mat(1));
  }
  if (id == "eigmax") { require_arity(args, 1, id); return eigmax(mat(0)); }
  if (id == "log_quad_form") {
    require_arity(args, 2, id);
    auto hs = as_vector_list(args[0]);
    return log_quad_form(hs, mat(1));
  }
  if (id == "eigsummax") { require_arity(args, 2, id); return eigsummax(mat(0), get_int(args, 1, id)); }
  if (id == "schatten_norm") { require_arity(args, 2, id); return schatten_norm(mat(0), num(1)); }
  if (id == "sum_log_eigmax") {
    require_arity(args, 2, id);
    return sum_log_eigmax(mat(0), get_int(args, 1, id));
  }
  if (id == "sum_pow_log_eigmax") {
    require_arity(args, 3, id);
    return sum_pow_log_eigmax(mat(0), get_int(args, 1, id), num(2));
  }
  if (id == "entrywise_l1") { require_arity(args, 1, id); return entrywise_l1(mat(0)); }
  if (id == "conjugation") { require_arity(args, 2, id); return conjugation(mat(0), mat(1)); }
  if (id == "adjoint") { require_arity(args, 1, id); return adjoint(mat(0)); }
  if (id == "inv") { require_arity(args, 1, id); return inverse(mat(0)); }
  if (id == "hadamard_product") {
    require_arity(args, 2, id);
    return hadamard_product(mat(0), mat(1));
  }
  if (id == "diag_matrix") { require_arity(args, 1, id); return diag_matrix(mat(0)); }
  if (id == "positive_affine") {
    require_arity(args, 4, id);
    auto ys = as_matrix_list(args[1]);
    return positive_affine(mat(0), ys, mat(2), get_int(args, 3, id));
  }

  // Scalar-on-scalar outer functions.
  if (id == "exp") { require_arity(args, 1, id); return std::exp(num(0)); }
  if (id == "log" || id == "neg_log") {
    require_arity(args, 1, id);
    const double x = num(0);
    if (!(x > 0.0)) throw DomainError(std::string(id) + ": argument must be positive");
    return id == "log" ? std::log(x) : -std::log(x);
  }
  if (id == "pow") {
    require_arity(args, 2, id);
    const double x = num(0);
    const double p = num(1);
    if (!(p >= 1.0)) throw DomainError("pow: exponent must be >= 1");
    if (x < 0.0) throw DomainError("pow: argument must be nonnegative");
    return std::pow(x, p);
  }
  if (id == "abs") { require_arity(args, 1, id); return std::abs(num(0)); }

  throw SignatureError("unknown atom '" + std::string(id) + "'");
}

}  // namespace geocert::spd
