#pragma once

// Numeric semantics of the atom catalog. Manifold arguments are plain
// matrices validated as SPD on entry; matrix-valued atoms return validated
// SPD matrices.

#include "geocert/spd.hpp"

#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace geocert {

/// Numeric argument of an atom: scalar, vector, matrix or lists thereof.
using NumericArg = std::variant<double, spd::Vector, spd::Matrix, std::vector<spd::Vector>,
                                std::vector<spd::Matrix>>;

/// Numeric result of an atom or expression.
using Value = std::variant<double, spd::Matrix>;

namespace spd {

double logdet_atom(const Matrix& x);
double trace(const Matrix& x);
double entry_sum(const Matrix& x);
/// log det((X+Y)/2) - log det(XY)/2.
double sdivergence(const Matrix& x, const Matrix& y);
double distance_atom(const Matrix& x, const Matrix& y);
double quad_form(const Vector& h, const Matrix& x);
double eigmax(const Matrix& x);
/// log(sum_i h_i^T X h_i).
double log_quad_form(std::span<const Vector> hs, const Matrix& x);
/// Ky Fan k-function: sum of the k largest eigenvalues.
double eigsummax(const Matrix& x, int k);
double schatten_norm(const Matrix& x, double p);
/// sum_{i<=k} log(lambda_i) with eigenvalues in descending order.
double sum_log_eigmax(const Matrix& x, int k);
/// sum_{i<=k} max(log(lambda_i), 0)^p with eigenvalues in descending order.
double sum_pow_log_eigmax(const Matrix& x, int k, double p);
/// sum_{ij} |X_ij|. Not geodesically convex; used for counterexamples.
double entrywise_l1(const Matrix& x);

Matrix conjugation(const Matrix& x, const Matrix& b);
Matrix adjoint(const Matrix& x);
Matrix inverse(const Matrix& x);
Matrix hadamard_product(const Matrix& x, const Matrix& m);
Matrix diag_matrix(const Matrix& x);
/// B + sum_i Y_i^T X^r Y_i with r in {-1, +1}.
Matrix positive_affine(const Matrix& x, std::span<const Matrix> ys, const Matrix& b, int r);

/// Views a vector-list style parameter: a single vector, the columns of a
/// matrix, or an explicit list.
std::vector<Vector> as_vector_list(const NumericArg& arg);
/// Views a matrix-list style parameter: a single matrix or an explicit list.
std::vector<Matrix> as_matrix_list(const NumericArg& arg);

/// Dispatches to the catalog evaluators by atom id. DomainError on invalid
/// arguments, SignatureError on an unknown id.
Value eval_atom(std::string_view id, std::span<const NumericArg> args);

}  // namespace spd
}  // namespace geocert
