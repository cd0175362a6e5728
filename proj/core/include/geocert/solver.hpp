#pragma once

// Riemannian gradient descent on SPD(d) with the affine-invariant metric and
// exponential-map steps, plus objective constructors for the standard
// applications.

#include "geocert/expression.hpp"
#include "geocert/spd.hpp"

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace geocert::solver {

using spd::Matrix;
using spd::SPDMatrix;

enum class GradientKind { Analytic, FiniteDifference };

struct Objective {
  Eigen::Index dim = 0;
  std::function<double(const Matrix&)> value;
  /// Euclidean gradient (symmetric).
  std::function<Matrix(const Matrix&)> euclidean_gradient;
  /// Expression form, used for certification.
  std::optional<Expression> expression;
  GradientKind gradient_kind = GradientKind::Analytic;
};

/// Reverse-mode Euclidean gradient of a scalar expression with respect to
/// each variable, from the atoms' derivative rules. nullopt when an atom
/// on the path has no derivative rule.
std::optional<std::map<std::string, Matrix>> expression_gradient(const Expression& e, const Bindings& b);

/// Central differences in the symmetric coordinates, step h * max(1, |X|_F).
Matrix finite_difference_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                                  double h = 1e-6);

/// Objective from a scalar expression in one variable. Uses reverse-mode
/// gradients when every atom has a derivative rule, else finite differences
/// (flagged in gradient_kind).
Objective make_expression_objective(const Expression& e);

/// X sym(G) X, the gradient under the metric tr(X^{-1} U X^{-1} V).
/// NumericError when the gradient is not finite.
Matrix riemannian_grad(const Objective& obj, const SPDMatrix& x);

/// sqrt(tr(X^{-1} xi X^{-1} xi)).
double riemannian_norm(const SPDMatrix& x, const Matrix& xi);

/// X^{1/2} exp(-alpha X^{-1/2} xi X^{-1/2}) X^{1/2}.
SPDMatrix exp_step(const SPDMatrix& x, const Matrix& xi, double alpha);

/// Relative spacing below which two objective values are treated as equal.
inline constexpr double kValueResolution = 64.0 * std::numeric_limits<double>::epsilon();

struct SolverParams {
  std::size_t max_iter = 500;
  double grad_tol = 1e-8;
  double initial_step = 1.0;
  double backtrack = 0.5;
  double armijo = 1e-4;
  std::size_t max_halvings = 60;
};

enum class SolveStatus { Converged, MaxIterations, Stagnated };

struct SolveResult {
  SPDMatrix minimizer;
  double value = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIterations;
  std::vector<double> trajectory;  ///< objective values, starting at X0
  GradientKind gradient_kind = GradientKind::Analytic;
};

/// Steepest descent with Armijo backtracking. When the line search fails
/// after max_halvings the partial result is returned with status Stagnated.
/// Trial values within kValueResolution (relative) of the current value are
/// accepted only if the Riemannian gradient norm decreases, so the
/// trajectory is nonincreasing up to that resolution.
SolveResult gradient_descent(const Objective& obj, const SPDMatrix& x0, const SolverParams& params = {});

std::string_view to_string(SolveStatus s);

// Application objectives. Each carries an analytic gradient and the
// expression form over a variable named "X".

/// sdivergence(X, A) + sdivergence(X, I); minimized at A^{1/2}.
Objective make_matrix_sqrt_problem(const SPDMatrix& a);

/// sum_i w_i distance(A_i, X)^2. ConfigError on an empty list or negative
/// weights, ShapeError on mixed dimensions.
Objective make_karcher_problem(const std::vector<SPDMatrix>& as, const std::vector<double>& ws);

/// -logdet(X) + sum_i w_i logdet(A_i^T X A_i). InvalidConstant when an A_i
/// lacks full column rank.
Objective make_brascamp_lieb_problem(const std::vector<Matrix>& as, const std::vector<double>& ws);

/// (1/n) sum_i log(x_i^T X^{-1} x_i) + (1/d) logdet(X). ConfigError when
/// n < d, InvalidConstant on a zero sample.
Objective make_tyler_problem(const std::vector<spd::Vector>& xs);

/// Scales to trace d.
SPDMatrix trace_normalize(const SPDMatrix& s);

/// ||S - T(S)||_F / ||S||_F with T(S) = (d/n) sum_i x_i x_i^T / (x_i^T S^{-1} x_i).
double tyler_fixed_point_residual(const SPDMatrix& s, const std::vector<spd::Vector>& xs);

}  // namespace geocert::solver
