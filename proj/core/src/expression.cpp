#include "geocert/expression.hpp"

#include "geocert/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace geocert {

namespace detail {

struct Node {
  NodeKind kind = NodeKind::ConstScalar;
  std::string name;
  Manifold manifold;
  spd::Matrix matrix;
  Definiteness definiteness = Definiteness::None;
  double scalar = 0.0;
  std::vector<Expression> children;
  std::vector<double> weights;
  std::shared_ptr<const AtomDefinition> atom;
  AtomMetadata atom_meta;
  std::vector<Expression::Slot> slots;
  std::vector<Param> params;
  Eigen::Index dim = 0;
  bool constant = true;
  NodeMetadata meta;
};

}  // namespace detail

struct ExpressionFactory {
  static Expression make(detail::Node n) {
    return Expression(std::make_shared<const detail::Node>(std::move(n)));
  }
};

namespace {

bool same_matrix(const spd::Matrix& a, const spd::Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same_vector(const spd::Vector& a, const spd::Vector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

bool same_numeric(const NumericArg& a, const NumericArg& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, double>) {
          return x == y;
        } else if constexpr (std::is_same_v<T, spd::Vector>) {
          return same_vector(x, y);
        } else if constexpr (std::is_same_v<T, spd::Matrix>) {
          return same_matrix(x, y);
        } else if constexpr (std::is_same_v<T, std::vector<spd::Vector>>) {
          if (x.size() != y.size()) return false;
          for (std::size_t i = 0; i < x.size(); ++i)
            if (!same_vector(x[i], y[i])) return false;
          return true;
        } else {
          if (x.size() != y.size()) return false;
          for (std::size_t i = 0; i < x.size(); ++i)
            if (!same_matrix(x[i], y[i])) return false;
          return true;
        }
      },
      a);
}

const char* kind_name(ArgKind k) {
  switch (k) {
    case ArgKind::Manifold: return "manifold matrix";
    case ArgKind::Scalar: return "scalar expression";
    case ArgKind::MatrixParam: return "fixed matrix";
    case ArgKind::VectorParam: return "fixed vector";
    case ArgKind::VectorListParam: return "fixed vector list";
    case ArgKind::MatrixListParam: return "fixed matrix list";
    case ArgKind::ScalarParam: return "fixed scalar";
  }
  return "argument";
}

bool param_fits(ArgKind k, const NumericArg& v) {
  switch (k) {
    case ArgKind::MatrixParam: return std::holds_alternative<spd::Matrix>(v);
    case ArgKind::VectorParam: return std::holds_alternative<spd::Vector>(v);
    case ArgKind::VectorListParam:
      return std::holds_alternative<spd::Vector>(v) || std::holds_alternative<spd::Matrix>(v) ||
             std::holds_alternative<std::vector<spd::Vector>>(v);
    case ArgKind::MatrixListParam:
      return std::holds_alternative<spd::Matrix>(v) ||
             std::holds_alternative<std::vector<spd::Matrix>>(v);
    case ArgKind::ScalarParam: return std::holds_alternative<double>(v);
    default: return false;
  }
}

void require_scalar_children(const std::vector<Expression>& children, const char* what) {
  if (children.empty()) throw SignatureError(std::string(what) + " needs at least one operand");
  for (const auto& c : children)
    if (!c.is_scalar())
      throw SignatureError(std::string(what) + " operands must be scalar-valued");
}

bool all_constant(const std::vector<Expression>& children) {
  return std::all_of(children.begin(), children.end(),
                     [](const Expression& c) { return c.is_constant(); });
}

}  // namespace

Manifold Manifold::spd(Eigen::Index d) {
  if (d < 1) throw ShapeError("manifold dimension must be >= 1");
  return Manifold{d};
}

bool Param::operator==(const Param& o) const { return name == o.name && same_numeric(value, o.value); }

AtomMetadata AtomDefinition::metadata_for(std::span<const NumericArg* const> params) const {
  if (refine) return refine(params);
  AtomMetadata m;
  m.sign = signature.sign;
  m.gcurv = signature.gcurv;
  m.gmono = signature.gmono;
  m.ecurv = signature.ecurv;
  m.rule = rule;
  m.nominal_sign = signature.nominal_sign;
  m.domain_sign = domain_sign;
  return m;
}

// ---------------------------------------------------------------------------
// Expression accessors

NodeKind Expression::kind() const { return node_->kind; }
const std::string& Expression::name() const { return node_->name; }
const Manifold& Expression::manifold() const { return node_->manifold; }
const spd::Matrix& Expression::matrix_value() const { return node_->matrix; }
Definiteness Expression::definiteness() const { return node_->definiteness; }
double Expression::scalar_value() const { return node_->scalar; }
const std::vector<Expression>& Expression::children() const { return node_->children; }
const std::vector<double>& Expression::weights() const { return node_->weights; }
const AtomDefinition& Expression::atom() const { return *node_->atom; }
std::shared_ptr<const AtomDefinition> Expression::atom_ptr() const { return node_->atom; }
const AtomMetadata& Expression::atom_metadata() const { return node_->atom_meta; }
const std::vector<Expression::Slot>& Expression::slots() const { return node_->slots; }
const std::vector<Param>& Expression::params() const { return node_->params; }
bool Expression::is_scalar() const { return node_->dim == 0; }
Eigen::Index Expression::dim() const { return node_->dim; }
bool Expression::is_constant() const { return node_->constant; }
const NodeMetadata& Expression::metadata() const { return node_->meta; }

Expression Expression::rebuild(std::vector<Expression> children, NodeMetadata metadata) const {
  if (children.size() != node_->children.size())
    throw SignatureError("rebuild: child count changed");
  detail::Node copy = *node_;
  copy.children = std::move(children);
  copy.meta = std::move(metadata);
  return ExpressionFactory::make(std::move(copy));
}

bool Expression::operator==(const Expression& other) const {
  const detail::Node& a = *node_;
  const detail::Node& b = *other.node_;
  if (&a == &b) return true;
  if (a.kind != b.kind || a.dim != b.dim) return false;
  switch (a.kind) {
    case NodeKind::Variable:
      return a.name == b.name && a.manifold == b.manifold;
    case NodeKind::ConstMatrix:
      return a.name == b.name && a.definiteness == b.definiteness && same_matrix(a.matrix, b.matrix);
    case NodeKind::ConstScalar:
      return a.scalar == b.scalar;
    case NodeKind::ScalarMul:
      if (a.scalar != b.scalar) return false;
      break;
    case NodeKind::Add:
      if (a.weights != b.weights) return false;
      break;
    case NodeKind::AtomApply:
      if (a.atom->signature.id != b.atom->signature.id || a.params != b.params) return false;
      break;
    case NodeKind::MaxOf:
    case NodeKind::Product:
      break;
  }
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!(a.children[i] == b.children[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Builders

Expression make_variable(const std::string& name, Manifold manifold) {
  if (name.empty()) throw DeclarationConflict("variable name must be nonempty");
  if (manifold.dim < 1) throw ShapeError("manifold dimension must be >= 1");
  detail::Node n;
  n.kind = NodeKind::Variable;
  n.name = name;
  n.manifold = manifold;
  n.dim = manifold.dim;
  n.constant = false;
  return ExpressionFactory::make(std::move(n));
}

Expression Scope::variable(const std::string& name, Manifold manifold) {
  auto it = declared_.find(name);
  if (it != declared_.end() && !(it->second == manifold))
    throw DeclarationConflict("variable '" + name + "' already declared on SPD(" +
                              std::to_string(it->second.dim) + "), cannot redeclare on SPD(" +
                              std::to_string(manifold.dim) + ")");
  Expression v = make_variable(name, manifold);
  declared_.emplace(name, manifold);
  return v;
}

std::optional<Manifold> Scope::find(std::string_view name) const {
  auto it = declared_.find(name);
  if (it == declared_.end()) return std::nullopt;
  return it->second;
}

Expression make_const_matrix(spd::Matrix values, Definiteness definiteness, std::string name) {
  if (values.size() == 0) throw InvalidConstant("constant matrix is empty");
  if (!values.allFinite()) throw InvalidConstant("constant matrix has non-finite entries");
  if (definiteness != Definiteness::None) {
    try {
      spd::require_symmetric(values, "constant");
    } catch (const Error& e) {
      throw InvalidConstant(std::string("definiteness claim needs a square symmetric matrix: ") +
                            e.what());
    }
    spd::EigenPair e = spd::sym_eig(values);
    const double lmax = e.lambda.cwiseAbs().maxCoeff();
    const double lmin = e.lambda(e.lambda.size() - 1);
    const double tol = std::max(spd::kPdRelTol * lmax, spd::kPdAbsFloor);
    const bool ok = definiteness == Definiteness::PD ? lmin > tol : lmin >= -tol;
    if (!ok)
      throw InvalidConstant("constant " + (name.empty() ? std::string("matrix") : name) +
                            " is not " + (definiteness == Definiteness::PD ? "PD" : "PSD") +
                            " (smallest eigenvalue " + std::to_string(lmin) + ")");
  }
  detail::Node n;
  n.kind = NodeKind::ConstMatrix;
  n.dim = values.rows();
  n.matrix = std::move(values);
  n.definiteness = definiteness;
  n.name = std::move(name);
  return ExpressionFactory::make(std::move(n));
}

Expression make_const_scalar(double value) {
  if (!std::isfinite(value)) throw InvalidConstant("scalar constant must be finite");
  detail::Node n;
  n.kind = NodeKind::ConstScalar;
  n.scalar = value;
  return ExpressionFactory::make(std::move(n));
}

Expression make_add(std::vector<Expression> children, std::vector<double> weights) {
  require_scalar_children(children, "sum");
  if (weights.empty()) weights.assign(children.size(), 1.0);
  if (weights.size() != children.size())
    throw SignatureError("sum: weight count does not match operand count");
  for (double w : weights)
    if (!std::isfinite(w)) throw InvalidConstant("sum: weights must be finite");
  detail::Node n;
  n.kind = NodeKind::Add;
  n.constant = all_constant(children);
  n.children = std::move(children);
  n.weights = std::move(weights);
  return ExpressionFactory::make(std::move(n));
}

Expression make_scalar_mul(double weight, Expression child) {
  if (!std::isfinite(weight)) throw InvalidConstant("scalar weight must be finite");
  if (!child.is_scalar()) throw SignatureError("scalar multiplication needs a scalar operand");
  detail::Node n;
  n.kind = NodeKind::ScalarMul;
  n.scalar = weight;
  n.constant = child.is_constant();
  n.children.push_back(std::move(child));
  return ExpressionFactory::make(std::move(n));
}

Expression make_max(std::vector<Expression> children) {
  require_scalar_children(children, "max");
  detail::Node n;
  n.kind = NodeKind::MaxOf;
  n.constant = all_constant(children);
  n.children = std::move(children);
  return ExpressionFactory::make(std::move(n));
}

Expression make_product(Expression lhs, Expression rhs) {
  std::vector<Expression> children{std::move(lhs), std::move(rhs)};
  require_scalar_children(children, "product");
  detail::Node n;
  n.kind = NodeKind::Product;
  n.constant = all_constant(children);
  n.children = std::move(children);
  return ExpressionFactory::make(std::move(n));
}

Expression apply_atom(const AtomRegistry& registry, std::string_view id, std::vector<AtomInput> args) {
  auto def = registry.lookup(id);
  if (!def) throw SignatureError("unknown atom '" + std::string(id) + "'");
  const AtomSignature& sig = def->signature;
  if (args.size() != sig.args.size())
    throw SignatureError("atom '" + sig.id + "' expects " + std::to_string(sig.args.size()) +
                         " argument(s), got " + std::to_string(args.size()));

  detail::Node n;
  n.kind = NodeKind::AtomApply;
  n.atom = def;
  Eigen::Index manifold_dim = 0;

  for (std::size_t i = 0; i < args.size(); ++i) {
    const ArgKind k = sig.args[i];
    const std::string where =
        "atom '" + sig.id + "' argument " + std::to_string(i + 1) + " (" + kind_name(k) + ")";
    AtomInput& in = args[i];

    if (k == ArgKind::Manifold || k == ArgKind::Scalar) {
      Expression e = [&]() -> Expression {
        if (auto* ex = std::get_if<Expression>(&in)) return *ex;
        Param& p = std::get<Param>(in);
        if (k == ArgKind::Scalar && std::holds_alternative<double>(p.value))
          return make_const_scalar(std::get<double>(p.value));
        if (k == ArgKind::Manifold && std::holds_alternative<spd::Matrix>(p.value))
          return make_const_matrix(std::get<spd::Matrix>(p.value), Definiteness::None, p.name);
        throw SignatureError(where + ": wrong argument kind");
      }();
      if (k == ArgKind::Scalar) {
        if (!e.is_scalar()) throw SignatureError(where + ": expected a scalar subexpression");
      } else {
        if (e.is_scalar()) throw SignatureError(where + ": expected a matrix-valued subexpression");
        if (e.kind() == NodeKind::ConstMatrix) {
          if (e.matrix_value().rows() != e.matrix_value().cols())
            throw SignatureError(where + ": constant must be square");
          if (e.definiteness() != Definiteness::PD && !spd::is_spd(e.matrix_value()))
            throw InvalidConstant(where + ": constant " + e.name() +
                                  " must be positive definite here");
        }
        if (manifold_dim != 0 && e.dim() != manifold_dim)
          throw SignatureError(where + ": dimension mismatch (" + std::to_string(e.dim()) +
                               " vs " + std::to_string(manifold_dim) + ")");
        manifold_dim = e.dim();
      }
      n.constant = n.constant && e.is_constant();
      n.slots.push_back({k, false, n.children.size()});
      n.children.push_back(std::move(e));
    } else {
      Param p = [&]() -> Param {
        if (auto* pp = std::get_if<Param>(&in)) return *pp;
        const Expression& ex = std::get<Expression>(in);
        if (ex.kind() == NodeKind::ConstScalar) return Param(ex.scalar_value());
        if (ex.kind() == NodeKind::ConstMatrix) return Param(NumericArg(ex.matrix_value()), ex.name());
        throw SignatureError(where + ": expected a fixed parameter, got an expression");
      }();
      // A single-column matrix is accepted where a vector is expected.
      if (k == ArgKind::VectorParam) {
        if (auto* m = std::get_if<spd::Matrix>(&p.value); m && m->cols() == 1)
          p.value = spd::Vector(m->col(0));
      }
      if (!param_fits(k, p.value)) throw SignatureError(where + ": wrong parameter type");
      n.slots.push_back({k, true, n.params.size()});
      n.params.push_back(std::move(p));
    }
  }

  std::vector<const NumericArg*> param_ptrs;
  for (const Param& p : n.params) param_ptrs.push_back(&p.value);
  std::span<const NumericArg* const> params(param_ptrs);

  try {
    if (def->shape) {
      n.dim = def->shape(manifold_dim, params);
    } else {
      n.dim = sig.result == ResultKind::Scalar ? 0 : manifold_dim;
    }
  } catch (const InvalidConstant&) {
    throw;
  } catch (const Error& e) {
    throw SignatureError("atom '" + sig.id + "': " + e.what());
  }
  if ((sig.result == ResultKind::Scalar) != (n.dim == 0))
    throw SignatureError("atom '" + sig.id + "': shape rule disagrees with result kind");
  n.atom_meta = def->metadata_for(params);
  return ExpressionFactory::make(std::move(n));
}

Expression apply_atom(std::string_view id, std::vector<AtomInput> args) {
  return apply_atom(default_registry(), id, std::move(args));
}

Expression operator+(const Expression& a, const Expression& b) { return make_add({a, b}); }
Expression operator-(const Expression& a, const Expression& b) {
  return make_add({a, make_scalar_mul(-1.0, b)});
}
Expression operator-(const Expression& a) { return make_scalar_mul(-1.0, a); }
Expression operator*(double w, const Expression& e) { return make_scalar_mul(w, e); }

// ---------------------------------------------------------------------------
// Registry

void AtomRegistry::register_atom(AtomDefinition def) {
  const std::string id = def.signature.id;
  if (id.empty()) throw RegistrationConflict("atom id must be nonempty");
  if (atoms_.count(id)) throw RegistrationConflict("atom '" + id + "' is already registered");
  if (!def.evaluate) throw RegistrationConflict("atom '" + id + "' needs an evaluator");

  // Probe shape consistency when the atom takes only manifold arguments.
  const auto& kinds = def.signature.args;
  if (!kinds.empty() && !def.shape &&
      std::all_of(kinds.begin(), kinds.end(), [](ArgKind k) { return k == ArgKind::Manifold; })) {
    std::vector<NumericArg> probe(kinds.size(), NumericArg(spd::Matrix(spd::Matrix::Identity(2, 2))));
    try {
      Value v = def.evaluate(probe);
      const bool scalar = std::holds_alternative<double>(v);
      if (scalar != (def.signature.result == ResultKind::Scalar))
        throw RegistrationConflict("atom '" + id + "': evaluator result kind does not match signature");
    } catch (const RegistrationConflict&) {
      throw;
    } catch (const std::exception&) {
      // Evaluators with narrower domains are checked at evaluation time.
    }
  }
  atoms_.emplace(id, std::make_shared<const AtomDefinition>(std::move(def)));
}

void AtomRegistry::register_atom(AtomSignature sig, Evaluator evaluator, VectorJacobianProduct vjp) {
  AtomDefinition def;
  def.signature = std::move(sig);
  def.evaluate = std::move(evaluator);
  def.vjp = std::move(vjp);
  register_atom(std::move(def));
}

bool AtomRegistry::contains(std::string_view id) const { return atoms_.find(id) != atoms_.end(); }

std::shared_ptr<const AtomDefinition> AtomRegistry::lookup(std::string_view id) const {
  auto it = atoms_.find(id);
  return it == atoms_.end() ? nullptr : it->second;
}

std::vector<std::string> AtomRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : atoms_) out.push_back(id);
  return out;
}

const AtomRegistry& default_registry() {
  static const AtomRegistry registry = AtomRegistry::with_catalog();
  return registry;
}

// ---------------------------------------------------------------------------
// Evaluation and traversal helpers

namespace {

Value eval_node(const Expression& e, const Bindings& b) {
  switch (e.kind()) {
    case NodeKind::Variable: {
      auto it = b.find(e.name());
      if (it == b.end()) throw SignatureError("no value bound for variable '" + e.name() + "'");
      if (it->second.rows() != e.dim() || it->second.cols() != e.dim())
        throw ShapeError("value bound to '" + e.name() + "' has the wrong shape");
      return it->second;
    }
    case NodeKind::ConstMatrix: return e.matrix_value();
    case NodeKind::ConstScalar: return e.scalar_value();
    case NodeKind::ScalarMul:
      return e.scalar_value() * std::get<double>(eval_node(e.children()[0], b));
    case NodeKind::Add: {
      double s = 0.0;
      for (std::size_t i = 0; i < e.children().size(); ++i)
        s += e.weights()[i] * std::get<double>(eval_node(e.children()[i], b));
      return s;
    }
    case NodeKind::MaxOf: {
      double m = -std::numeric_limits<double>::infinity();
      for (const auto& c : e.children()) m = std::max(m, std::get<double>(eval_node(c, b)));
      return m;
    }
    case NodeKind::Product:
      return std::get<double>(eval_node(e.children()[0], b)) *
             std::get<double>(eval_node(e.children()[1], b));
    case NodeKind::AtomApply: {
      std::vector<NumericArg> args;
      args.reserve(e.slots().size());
      for (const auto& s : e.slots()) {
        if (s.is_param) {
          args.push_back(e.params()[s.index].value);
        } else {
          Value v = eval_node(e.children()[s.index], b);
          if (auto* d = std::get_if<double>(&v))
            args.emplace_back(*d);
          else
            args.emplace_back(std::move(std::get<spd::Matrix>(v)));
        }
      }
      Value out = e.atom().evaluate(args);
      if (std::holds_alternative<double>(out) != e.is_scalar())
        throw SignatureError("atom '" + e.atom().signature.id + "' returned the wrong result kind");
      if (auto* d = std::get_if<double>(&out); d && !std::isfinite(*d))
        throw DomainError("atom '" + e.atom().signature.id + "' produced a non-finite value");
      return out;
    }
  }
  throw SignatureError("unknown node kind");
}

void collect(const Expression& e, std::map<std::string, Manifold>& out) {
  if (e.kind() == NodeKind::Variable) {
    auto [it, inserted] = out.emplace(e.name(), e.manifold());
    if (!inserted && !(it->second == e.manifold()))
      throw DeclarationConflict("variable '" + e.name() + "' used with two different manifolds");
  }
  for (const auto& c : e.children()) collect(c, out);
}

}  // namespace

Value evaluate(const Expression& e, const Bindings& bindings) { return eval_node(e, bindings); }

double evaluate_scalar(const Expression& e, const Bindings& bindings) {
  if (!e.is_scalar()) throw ShapeError("expression is matrix-valued");
  return std::get<double>(eval_node(e, bindings));
}

std::vector<std::pair<std::string, Manifold>> collect_variables(const Expression& e) {
  std::map<std::string, Manifold> vars;
  collect(e, vars);
  return {vars.begin(), vars.end()};
}

std::size_t node_count(const Expression& e) {
  std::size_t n = 1;
  for (const auto& c : e.children()) n += node_count(c);
  return n;
}

std::string label(const Expression& e) {
  switch (e.kind()) {
    case NodeKind::Variable: return e.name();
    case NodeKind::ConstMatrix: {
      if (!e.name().empty()) return e.name();
      std::ostringstream os;
      os << "const[" << e.matrix_value().rows() << "x" << e.matrix_value().cols() << "]";
      return os.str();
    }
    case NodeKind::ConstScalar: {
      std::ostringstream os;
      os.precision(17);
      os << e.scalar_value();
      return os.str();
    }
    case NodeKind::Add: return "ADD";
    case NodeKind::ScalarMul: return "MUL";
    case NodeKind::MaxOf: return "MAX";
    case NodeKind::Product: return "PRODUCT";
    case NodeKind::AtomApply: return e.atom().signature.id;
  }
  return "?";
}

}  // namespace geocert
