#pragma once

// Immutable symbolic expression trees over SPD-manifold variables.
//
// Leaves are variables and constants; internal nodes are sums, scalar
// scalings, pointwise maxima, (uncertifiable) products and atom
// applications. Atom parameters such as fixed vectors or the Ky Fan k are
// stored inside the AtomApply node and are not children.

#include "geocert/lattice.hpp"
#include "geocert/spd_atoms.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace geocert {

/// SPD(dim) with the affine-invariant metric; the only manifold kind.
struct Manifold {
  Eigen::Index dim = 1;

  static Manifold spd(Eigen::Index d);
  bool operator==(const Manifold&) const = default;
};

enum class Definiteness { None, PSD, PD };

enum class NodeKind { Variable, ConstMatrix, ConstScalar, Add, ScalarMul, AtomApply, MaxOf, Product };

/// Kind of one atom argument slot.
enum class ArgKind {
  Manifold,         ///< matrix-valued subexpression living on the manifold
  Scalar,           ///< scalar subexpression (scalar-on-scalar functions)
  MatrixParam,      ///< fixed matrix
  VectorParam,      ///< fixed vector
  VectorListParam,  ///< fixed vectors: a vector, matrix columns or a list
  MatrixListParam,  ///< fixed matrices: a matrix or a list
  ScalarParam,      ///< fixed real number
};

enum class ResultKind { Scalar, Matrix };

/// How the analysis composes an atom with its manifold arguments.
enum class CompositionRule {
  Standard,  ///< DCP-style table on (curvature, monotonicity) vs inner curvature
  Inverse,   ///< maps geodesics to geodesics when its argument is GLinear
};

struct AtomSignature {
  std::string id;
  std::vector<ArgKind> args;
  ResultKind result = ResultKind::Scalar;
  Sign sign = Sign::AnySign;
  GCurvature gcurv = GCurvature::GUnknown;
  GMonotonicity gmono = GMonotonicity::GAnyMono;
  ECurvature ecurv = ECurvature::UnknownCurvature;
  /// True when `sign` is catalog metadata that does not hold on the whole
  /// domain (logdet is registered Positive). Domain checks then ignore it.
  bool nominal_sign = false;
};

/// Metadata of one atom instance, after parameter-dependent refinement.
struct AtomMetadata {
  Sign sign = Sign::AnySign;
  GCurvature gcurv = GCurvature::GUnknown;
  GMonotonicity gmono = GMonotonicity::GAnyMono;
  ECurvature ecurv = ECurvature::UnknownCurvature;
  CompositionRule rule = CompositionRule::Standard;
  bool nominal_sign = false;
  /// Required sign of scalar arguments (scalar functions with restricted
  /// domain), or nullopt when unrestricted.
  std::optional<Sign> domain_sign;
};

/// Fixed atom parameter with an optional source name (used when printing).
struct Param {
  NumericArg value;
  std::string name;

  Param(double v) : value(v) {}  // NOLINT(google-explicit-constructor)
  Param(spd::Vector v) : value(std::move(v)) {}  // NOLINT
  Param(spd::Matrix v) : value(std::move(v)) {}  // NOLINT
  Param(NumericArg v, std::string n) : value(std::move(v)), name(std::move(n)) {}

  bool operator==(const Param& o) const;
};

using Evaluator = std::function<Value(std::span<const NumericArg>)>;

/// Reverse-mode derivative: given the numeric arguments and the cotangent of
/// the result, returns one cotangent per expression (non-parameter) argument,
/// in argument order. Matrix cotangents are Euclidean gradients.
using VectorJacobianProduct =
    std::function<std::vector<Value>(std::span<const NumericArg>, const Value&)>;

/// Validates parameters and returns the result dimension (0 for scalars).
/// `manifold_dim` is the common dimension of the manifold arguments (0 if
/// none); `params` lists the parameter values in slot order.
using ShapeRule =
    std::function<Eigen::Index(Eigen::Index manifold_dim, std::span<const NumericArg* const> params)>;

using MetadataRule = std::function<AtomMetadata(std::span<const NumericArg* const> params)>;

struct AtomDefinition {
  AtomSignature signature;
  Evaluator evaluate;
  ShapeRule shape;        ///< optional; defaults to d for matrix results
  MetadataRule refine;    ///< optional; defaults to the signature metadata
  VectorJacobianProduct vjp;  ///< optional; enables analytic gradients
  CompositionRule rule = CompositionRule::Standard;
  std::optional<Sign> domain_sign;

  AtomMetadata metadata_for(std::span<const NumericArg* const> params) const;
};

/// Per-node analysis slots, filled by the propagation passes.
struct NodeMetadata {
  std::optional<Sign> sign;
  std::optional<GCurvature> gcurvature;
  std::optional<ECurvature> ecurvature;
  std::string rule;  ///< geodesic rule applied at this node
  std::string note;  ///< diagnostic recorded by the passes
};

namespace detail {
struct Node;
}

/// Handle to an immutable expression node. Cheap to copy; safe to share
/// across threads.
class Expression {
 public:
  NodeKind kind() const;

  /// Variable or constant name (may be empty for unnamed constants).
  const std::string& name() const;
  const Manifold& manifold() const;          ///< Variable only
  const spd::Matrix& matrix_value() const;   ///< ConstMatrix only
  Definiteness definiteness() const;         ///< ConstMatrix only
  double scalar_value() const;               ///< ConstScalar value or ScalarMul weight

  /// Expression children (for AtomApply: the non-parameter arguments).
  const std::vector<Expression>& children() const;
  const std::vector<double>& weights() const;  ///< Add only

  // AtomApply only.
  const AtomDefinition& atom() const;
  std::shared_ptr<const AtomDefinition> atom_ptr() const;
  const AtomMetadata& atom_metadata() const;
  /// Slot layout: for each signature argument either a child index or a
  /// parameter index.
  struct Slot {
    ArgKind kind;
    bool is_param;
    std::size_t index;
  };
  const std::vector<Slot>& slots() const;
  const std::vector<Param>& params() const;

  bool is_scalar() const;
  /// Matrix side length for matrix-valued nodes, 0 for scalars.
  Eigen::Index dim() const;
  /// True when no variable occurs in the subtree.
  bool is_constant() const;

  const NodeMetadata& metadata() const;
  /// Copy of this node with new children and metadata (same kind and payload).
  Expression rebuild(std::vector<Expression> children, NodeMetadata metadata) const;

  /// Deep structural equality, ignoring analysis metadata.
  bool operator==(const Expression& other) const;

  const detail::Node* node() const { return node_.get(); }

 private:
  explicit Expression(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;

  friend struct ExpressionFactory;
};

/// Argument passed to apply_atom: a subexpression or a fixed parameter.
using AtomInput = std::variant<Expression, Param>;

class AtomRegistry {
 public:
  /// Empty registry.
  AtomRegistry() = default;
  /// Registry preloaded with the built-in catalog.
  static AtomRegistry with_catalog();

  /// Adds an atom. RegistrationConflict when the id exists.
  void register_atom(AtomDefinition def);
  /// Convenience overload: default shape rule and metadata from `sig`.
  void register_atom(AtomSignature sig, Evaluator evaluator, VectorJacobianProduct vjp = {});

  bool contains(std::string_view id) const;
  /// nullptr when absent.
  std::shared_ptr<const AtomDefinition> lookup(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, std::shared_ptr<const AtomDefinition>, std::less<>> atoms_;
};

/// The process-wide catalog registry, built on first use.
const AtomRegistry& default_registry();

/// Tracks variable declarations so that a name is bound to one manifold.
class Scope {
 public:
  /// make_variable: Variable leaf. DeclarationConflict when `name` is
  /// already declared on a different manifold; identical redeclaration is
  /// accepted.
  Expression variable(const std::string& name, Manifold manifold);
  std::optional<Manifold> find(std::string_view name) const;

 private:
  std::map<std::string, Manifold, std::less<>> declared_;
};

/// Variable leaf without scope tracking.
Expression make_variable(const std::string& name, Manifold manifold);

/// Constant matrix leaf. A PD/PSD claim requires a square symmetric matrix
/// whose minimum eigenvalue is > tol (PD) or >= -tol (PSD); otherwise
/// InvalidConstant.
Expression make_const_matrix(spd::Matrix values, Definiteness definiteness = Definiteness::None,
                             std::string name = {});
Expression make_const_scalar(double value);
/// Weighted sum of scalar subexpressions; weights default to 1.
Expression make_add(std::vector<Expression> children, std::vector<double> weights = {});
Expression make_scalar_mul(double weight, Expression child);
Expression make_max(std::vector<Expression> children);
/// Product of two scalar subexpressions. Never certified by the analysis.
Expression make_product(Expression lhs, Expression rhs);

/// Applies a registered atom. SignatureError on unknown id, wrong arity,
/// wrong argument kinds or dimension mismatch; InvalidConstant when a
/// constant manifold argument is not PD.
Expression apply_atom(const AtomRegistry& registry, std::string_view id, std::vector<AtomInput> args);
Expression apply_atom(std::string_view id, std::vector<AtomInput> args);

Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression operator*(double w, const Expression& e);

using Bindings = std::map<std::string, spd::Matrix, std::less<>>;

/// Numeric evaluation; throws DomainError when an atom leaves its domain and
/// SignatureError when a variable is unbound.
Value evaluate(const Expression& e, const Bindings& bindings);
double evaluate_scalar(const Expression& e, const Bindings& bindings);

/// Variables occurring in `e`, sorted by name.
std::vector<std::pair<std::string, Manifold>> collect_variables(const Expression& e);

std::size_t node_count(const Expression& e);

/// Short node label, e.g. "ADD", "logdet", "X".
std::string label(const Expression& e);

}  // namespace geocert
