#pragma once

// Randomized falsification of curvature and monotonicity claims by sampling
// geodesics (or Euclidean segments) between random SPD matrices.

#include "geocert/analysis.hpp"
#include "geocert/expression.hpp"
#include "geocert/spd.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geocert::oracle {

/// Function of `arity` SPD arguments (a point of a product manifold),
/// scalar- or matrix-valued. Matrix values are compared in the Loewner order.
struct SpdFunction {
  std::size_t arity = 1;
  /// Per-argument dimensions; empty means FuzzConfig::dim for every argument.
  std::vector<Eigen::Index> dims;
  std::function<Value(std::span<const spd::Matrix>)> eval;
};

SpdFunction scalar_function(std::function<double(const spd::Matrix&)> f);
SpdFunction matrix_function(std::function<spd::Matrix(const spd::Matrix&)> f);
/// Expression over its variables in name order (collect_variables).
SpdFunction from_expression(const Expression& e);

/// Endpoints injected as the first trials, one matrix per argument.
struct SeedPair {
  std::vector<spd::Matrix> a;
  std::vector<spd::Matrix> b;
};

struct FuzzConfig {
  std::size_t trials = 1000;
  Eigen::Index dim = 3;
  double cond_max = 100.0;
  std::size_t t_samples = 5;  ///< uniform t values on top of 1/2, 1/4, 3/4
  double tol = 1e-9;
  std::uint64_t seed = 20240611;
  std::vector<SeedPair> seeds;
  /// Also require two-sided equality within linear_tol (g-linear claims).
  bool check_linear = false;
  double linear_tol = 1e-8;
};

/// ConfigError when trials == 0, dim < 1, cond_max < 1 or tol <= 0.
void validate(const FuzzConfig& cfg);

enum class FuzzVerdict { NoViolationFound, ViolationFound };

struct Witness {
  std::vector<spd::Matrix> a;
  std::vector<spd::Matrix> b;
  double t = 0.0;
  /// Scalar functions: f at the interpolated point and the comparison value.
  /// Matrix functions: lhs is the largest eigenvalue of the violating
  /// difference and rhs is 0.
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 1.0;
  std::size_t trial = 0;
};

struct FuzzReport {
  FuzzVerdict verdict = FuzzVerdict::NoViolationFound;
  std::size_t trials_run = 0;
  std::size_t trials_skipped = 0;
  /// Largest scale-normalized residual seen (0 when every check held with
  /// slack; two-sided for linear checks).
  double worst_residual = 0.0;
  /// First violation found, in trial order.
  std::optional<Witness> witness;
};

/// f(gamma(t)) <= (1-t) f(A) + t f(B) along affine-invariant geodesics; for
/// matrix-valued f, f(gamma(t)) <= f(A) #_t f(B) in the Loewner order.
FuzzReport check_gconvex(const SpdFunction& f, const FuzzConfig& cfg);
/// The reverse inequalities.
FuzzReport check_gconcave(const SpdFunction& f, const FuzzConfig& cfg);
/// Convexity along Euclidean segments (1-t)A + tB.
FuzzReport check_econvex(const SpdFunction& f, const FuzzConfig& cfg);

enum class Direction { Increasing, Decreasing };

/// Samples A >= B with B = A^{1/2}(I - sR)A^{1/2}, R PSD with norm < 1, and
/// checks f(A) >= f(B) (increasing) or f(A) <= f(B) (decreasing).
FuzzReport check_monotone_loewner(const SpdFunction& f, Direction direction, const FuzzConfig& cfg);

enum class Consistency { Consistent, SoundnessBug, Informational };

struct CrossValidation {
  Consistency verdict = Consistency::Consistent;
  GCurvature claimed = GCurvature::GUnknown;
  std::optional<FuzzReport> convex;   ///< geodesic convexity check, when run
  std::optional<FuzzReport> concave;  ///< geodesic concavity check, when run
  std::string observed;               ///< summary of the empirical behavior
};

/// Analyzes `e` and fuzzes the matching inequality (both for GLinear and
/// GUnknown). InconclusiveError when most trials leave the domain.
CrossValidation cross_validate(const Expression& e, const FuzzConfig& cfg);

std::string_view to_string(FuzzVerdict v);
std::string_view to_string(Consistency c);

/// Deterministic per-index seed derived from a base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace geocert::oracle
