#pragma once

// Bottom-up propagation of sign, geodesic curvature and Euclidean curvature
// through an expression tree.

#include "geocert/expression.hpp"

#include <span>
#include <string>
#include <vector>

namespace geocert {

/// One summand of a weighted sum: its curvature and scalar weight.
struct AddTerm {
  GCurvature curvature;
  double weight;
};

/// Conic/signed combination. Negative weights mirror the child curvature;
/// the result is the lattice join.
GCurvature combine_add(std::span<const AddTerm> terms);

/// Pointwise maximum of scalar functions.
GCurvature combine_max(std::span<const GCurvature> children);

/// Scalar outer function with Euclidean curvature `outer` and monotonicity
/// `mono`, applied to a scalar subexpression of geodesic curvature `inner`.
GCurvature compose_scalar(ECurvature outer, GMonotonicity mono, GCurvature inner);

/// Atom with manifold (matrix-valued) arguments applied to subexpressions of
/// the given Loewner-sense geodesic curvatures. Every argument must satisfy
/// the rule for a side to be certified.
GCurvature compose_loewner(const AtomMetadata& outer, std::span<const GCurvature> inners);
GCurvature compose_loewner(const AtomSignature& outer, std::span<const GCurvature> inners);

/// Matrix inversion maps geodesics to geodesics, so a GLinear argument stays
/// GLinear; anything else is GUnknown.
GCurvature compose_inverse(GCurvature inner);

/// Same table as compose_scalar, over Euclidean curvature.
ECurvature compose_euclidean(ECurvature outer, GMonotonicity mono, std::span<const ECurvature> inners);

// Propagation passes. Each returns a copy of the tree with the corresponding
// metadata slot filled on every node. The curvature passes compute signs
// first when they are missing.
Expression propagate_sign(const Expression& e);
Expression propagate_gcurvature(const Expression& e);
Expression propagate_ecurvature(const Expression& e);

struct TraceEntry {
  std::string path;   ///< "/" for the root, "/0/1" for child 1 of child 0
  std::string label;  ///< node label, e.g. "ADD", "logdet", "X"
  std::string rule;   ///< geodesic rule applied
  std::vector<GCurvature> inputs;  ///< child geodesic curvatures
  Sign sign;
  GCurvature gcurvature;
  ECurvature ecurvature;
  std::string note;
};

struct AnalysisReport {
  Sign sign;
  GCurvature gcurvature;
  ECurvature ecurvature;
  std::vector<TraceEntry> trace;  ///< post-order, one entry per node
};

/// Runs all three passes. ShapeError when the root is matrix-valued,
/// DomainError when a variable does not live on `m`.
AnalysisReport analyze(const Expression& e, const Manifold& m);

/// Fully annotated tree (all three passes).
Expression annotate(const Expression& e);

}  // namespace geocert
