#include "geocert/solver.hpp"

#include "geocert/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace geocert::solver {

namespace {

using spd::Vector;

class Backprop {
 public:
  explicit Backprop(const Bindings& b) : bindings_(b) {}

  Value value(const Expression& e) {
    auto it = cache_.find(e.node());
    if (it != cache_.end()) return it->second;
    Value v = [&]() -> Value {
      switch (e.kind()) {
        case NodeKind::Add: {
          double s = 0.0;
          for (std::size_t i = 0; i < e.children().size(); ++i)
            s += e.weights()[i] * std::get<double>(value(e.children()[i]));
          return s;
        }
        case NodeKind::ScalarMul: return e.scalar_value() * std::get<double>(value(e.children()[0]));
        case NodeKind::MaxOf: {
          double m = -std::numeric_limits<double>::infinity();
          for (const auto& c : e.children()) m = std::max(m, std::get<double>(value(c)));
          return m;
        }
        case NodeKind::Product:
          return std::get<double>(value(e.children()[0])) * std::get<double>(value(e.children()[1]));
        case NodeKind::AtomApply: return e.atom().evaluate(atom_args(e));
        default: return evaluate(e, bindings_);
      }
    }();
    cache_.emplace(e.node(), v);
    return v;
  }

  // Returns false when a derivative rule is missing.
  bool push(const Expression& e, const Value& cot) {
    switch (e.kind()) {
      case NodeKind::Variable: {
        const Matrix& g = std::get<Matrix>(cot);
        auto [it, inserted] = grads_.emplace(e.name(), g);
        if (!inserted) it->second += g;
        return true;
      }
      case NodeKind::ConstMatrix:
      case NodeKind::ConstScalar: return true;
      case NodeKind::Add: {
        const double c = std::get<double>(cot);
        for (std::size_t i = 0; i < e.children().size(); ++i)
          if (!push(e.children()[i], c * e.weights()[i])) return false;
        return true;
      }
      case NodeKind::ScalarMul: return push(e.children()[0], std::get<double>(cot) * e.scalar_value());
      case NodeKind::MaxOf: {
        // Subgradient through the first maximizing child.
        std::size_t best = 0;
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < e.children().size(); ++i) {
          const double v = std::get<double>(value(e.children()[i]));
          if (v > m) {
            m = v;
            best = i;
          }
        }
        return push(e.children()[best], cot);
      }
      case NodeKind::Product: {
        const double c = std::get<double>(cot);
        const double a = std::get<double>(value(e.children()[0]));
        const double b = std::get<double>(value(e.children()[1]));
        return push(e.children()[0], c * b) && push(e.children()[1], c * a);
      }
      case NodeKind::AtomApply: {
        if (e.is_constant()) return true;
        if (!e.atom().vjp) return false;
        const std::vector<Value> parts = e.atom().vjp(atom_args(e), cot);
        if (parts.size() != e.children().size())
          throw SignatureError("atom '" + e.atom().signature.id + "': derivative rule arity mismatch");
        for (std::size_t i = 0; i < parts.size(); ++i)
          if (!push(e.children()[i], parts[i])) return false;
        return true;
      }
    }
    return false;
  }

  std::map<std::string, Matrix> take() { return std::move(grads_); }

 private:
  std::vector<NumericArg> atom_args(const Expression& e) {
    std::vector<NumericArg> args;
    for (const auto& s : e.slots()) {
      if (s.is_param) {
        args.push_back(e.params()[s.index].value);
      } else {
        Value v = value(e.children()[s.index]);
        if (const double* d = std::get_if<double>(&v))
          args.emplace_back(*d);
        else
          args.emplace_back(std::get<Matrix>(v));
      }
    }
    return args;
  }

  const Bindings& bindings_;
  std::unordered_map<const detail::Node*, Value> cache_;
  std::map<std::string, Matrix> grads_;
};

Matrix inverse_of(const Matrix& x) { return spd::inv(SPDMatrix(x)).matrix(); }

// Gradient of distance(X, A)^2 with respect to X.
Matrix squared_distance_gradient(const Matrix& x, const SPDMatrix& a) {
  const Matrix a_mhalf = spd::inv_sqrt(a).matrix();
  const spd::EigenPair s = spd::sym_eig(spd::symmetrize(a_mhalf * x * a_mhalf));
  const Vector w = 2.0 * (s.lambda.array().log() / s.lambda.array()).matrix();
  return spd::symmetrize(a_mhalf * s.q * w.asDiagonal() * s.q.transpose() * a_mhalf);
}

bool has_derivative_rules(const Expression& e) {
  if (e.is_constant()) return true;
  if (e.kind() == NodeKind::AtomApply && !e.atom().vjp) return false;
  for (const auto& c : e.children())
    if (!has_derivative_rules(c)) return false;
  return true;
}

Expression variable_x(Eigen::Index d) { return make_variable("X", Manifold::spd(d)); }

}  // namespace

std::optional<std::map<std::string, Matrix>> expression_gradient(const Expression& e, const Bindings& b) {
  if (!e.is_scalar()) throw ShapeError("gradient: expression must be scalar-valued");
  Backprop bp(b);
  bp.value(e);
  if (!bp.push(e, 1.0)) return std::nullopt;
  auto grads = bp.take();
  for (auto& [name, g] : grads) g = spd::symmetrize(g);
  for (const auto& [name, m] : collect_variables(e))
    if (!grads.count(name)) grads.emplace(name, Matrix::Zero(m.dim, m.dim));
  return grads;
}

Matrix finite_difference_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x, double h) {
  const Eigen::Index d = x.rows();
  const double step = h * std::max(1.0, x.norm());
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      Matrix e = Matrix::Zero(d, d);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      const double deriv = (f(x + step * e) - f(x - step * e)) / (2.0 * step);
      // d/dt f(X + tE) = <G, E>: G_ii on the diagonal, 2 G_ij off it.
      if (i == j) {
        g(i, i) = deriv;
      } else {
        g(i, j) = deriv / 2.0;
        g(j, i) = deriv / 2.0;
      }
    }
  }
  return g;
}

Objective make_expression_objective(const Expression& e) {
  const auto vars = collect_variables(e);
  if (vars.size() != 1) throw ConfigError("objective must contain exactly one matrix variable");
  if (!e.is_scalar()) throw ShapeError("objective must be scalar-valued");
  const std::string name = vars.front().first;
  Objective obj;
  obj.dim = vars.front().second.dim;
  obj.expression = e;
  obj.value = [e, name](const Matrix& x) { return evaluate_scalar(e, Bindings{{name, x}}); };

  if (has_derivative_rules(e)) {
    obj.euclidean_gradient = [e, name](const Matrix& x) {
      auto g = expression_gradient(e, Bindings{{name, x}});
      if (!g) throw NumericError("missing derivative rule");
      return g->at(name);
    };
  } else {
    obj.gradient_kind = GradientKind::FiniteDifference;
    auto f = obj.value;
    obj.euclidean_gradient = [f](const Matrix& x) { return finite_difference_gradient(f, x); };
  }
  return obj;
}

Matrix riemannian_grad(const Objective& obj, const SPDMatrix& x) {
  const Matrix g = spd::symmetrize(obj.euclidean_gradient(x.matrix()));
  if (!g.allFinite()) throw NumericError("Euclidean gradient is not finite");
  return spd::symmetrize(x.matrix() * g * x.matrix());
}

double riemannian_norm(const SPDMatrix& x, const Matrix& xi) {
  const Matrix xm = spd::inv_sqrt(x).matrix();
  return (xm * xi * xm).norm();
}

SPDMatrix exp_step(const SPDMatrix& x, const Matrix& xi, double alpha) {
  const Matrix xh = spd::sqrt(x).matrix();
  const Matrix xmh = spd::inv_sqrt(x).matrix();
  const Matrix inner = spd::symmetrize(-alpha * (xmh * xi * xmh));
  return SPDMatrix(spd::symmetrize(xh * spd::exp_sym(inner).matrix() * xh));
}

SolveResult gradient_descent(const Objective& obj, const SPDMatrix& x0, const SolverParams& params) {
  if (!obj.value || !obj.euclidean_gradient) throw ConfigError("objective is incomplete");
  if (obj.dim != 0 && x0.dim() != obj.dim) throw ShapeError("initial point has the wrong dimension");

  auto safe_value = [&](const Matrix& x) {
    try {
      const double v = obj.value(x);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  SolveResult r{x0, 0.0, 0.0, 0, false, SolveStatus::MaxIterations, {}, obj.gradient_kind};
  r.value = obj.value(x0.matrix());
  if (!std::isfinite(r.value)) throw NumericError("objective is not finite at the initial point");
  r.trajectory.push_back(r.value);

  SPDMatrix x = x0;
  Matrix last_step;  // -alpha xi of the previous accepted step
  Matrix last_xi;
  for (std::size_t k = 0;; ++k) {
    const Matrix xi = riemannian_grad(obj, x);
    const double gnorm = riemannian_norm(x, xi);
    r.grad_norm = gnorm;
    r.iterations = k;
    if (gnorm <= params.grad_tol) {
      r.converged = true;
      r.status = SolveStatus::Converged;
      break;
    }
    if (k >= params.max_iter) {
      r.status = SolveStatus::MaxIterations;
      break;
    }
    // First trial: Barzilai-Borwein step from the last two gradients, else
    // the configured initial step.
    double alpha = params.initial_step;
    if (last_step.size() != 0) {
      const Matrix xinv = spd::inv(x).matrix();
      const Matrix y = xi - last_xi;
      const double ss = (xinv * last_step * xinv * last_step).trace();
      const double sy = (xinv * last_step * xinv * y).trace();
      if (sy > 0.0 && std::isfinite(ss / sy)) alpha = std::clamp(ss / sy, 1e-12, 1e12);
    }
    bool accepted = false;
    for (std::size_t h = 0; h <= params.max_halvings; ++h) {
      std::optional<SPDMatrix> trial;
      try {
        trial.emplace(exp_step(x, xi, alpha));
      } catch (const Error&) {
        trial.reset();
      }
      if (trial) {
        const double v = safe_value(trial->matrix());
        // Changes below the resolution of the objective values carry no
        // information; a smaller gradient decides instead.
        bool ok = false;
        if (std::abs(v - r.value) <= kValueResolution * std::max(1.0, std::abs(r.value)))
          ok = riemannian_norm(*trial, riemannian_grad(obj, *trial)) < gnorm;
        else
          ok = v <= r.value - params.armijo * alpha * gnorm * gnorm;
        if (ok) {
          last_step = -alpha * xi;
          last_xi = xi;
          x = *trial;
          r.value = v;
          accepted = true;
          break;
        }
      }
      alpha *= params.backtrack;
    }
    if (!accepted) {
      r.status = SolveStatus::Stagnated;
      break;
    }
    r.trajectory.push_back(r.value);
    r.minimizer = x;
  }
  r.minimizer = x;
  return r;
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::Stagnated: return "Stagnated";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Applications

Objective make_matrix_sqrt_problem(const SPDMatrix& a) {
  const Eigen::Index d = a.dim();
  const Matrix am = a.matrix();
  const Matrix id = Matrix::Identity(d, d);
  Objective obj;
  obj.dim = d;
  obj.value = [am, id](const Matrix& x) { return spd::sdivergence(x, am) + spd::sdivergence(x, id); };
  obj.euclidean_gradient = [am, id](const Matrix& x) {
    return spd::symmetrize(inverse_of(x + am) + inverse_of(x + id) - inverse_of(x));
  };
  const Expression X = variable_x(d);
  const Expression A = make_const_matrix(am, Definiteness::PD, "A");
  const Expression I = make_const_matrix(id, Definiteness::PD, "I");
  obj.expression = apply_atom("sdivergence", {X, A}) + apply_atom("sdivergence", {X, I});
  return obj;
}

Objective make_karcher_problem(const std::vector<SPDMatrix>& as, const std::vector<double>& ws) {
  if (as.empty()) throw ConfigError("Karcher mean needs at least one anchor");
  if (ws.size() != as.size()) throw ConfigError("Karcher mean: one weight per anchor");
  for (double w : ws)
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("Karcher mean: weights must be nonnegative");
  const Eigen::Index d = as.front().dim();
  for (const auto& a : as)
    if (a.dim() != d) throw ShapeError("Karcher mean: anchors have different dimensions");

  Objective obj;
  obj.dim = d;
  obj.value = [as, ws](const Matrix& x) {
    const SPDMatrix xs(x);
    double s = 0.0;
    for (std::size_t i = 0; i < as.size(); ++i) {
      const double dist = spd::distance(as[i], xs);
      s += ws[i] * dist * dist;
    }
    return s;
  };
  obj.euclidean_gradient = [as, ws](const Matrix& x) {
    Matrix g = Matrix::Zero(x.rows(), x.cols());
    for (std::size_t i = 0; i < as.size(); ++i) g += ws[i] * squared_distance_gradient(x, as[i]);
    return spd::symmetrize(g);
  };

  const Expression X = variable_x(d);
  std::vector<Expression> terms;
  for (std::size_t i = 0; i < as.size(); ++i) {
    const Expression ai = make_const_matrix(as[i].matrix(), Definiteness::PD, "A" + std::to_string(i + 1));
    terms.push_back(apply_atom("pow", {apply_atom("distance", {ai, X}), Param(2.0)}));
  }
  obj.expression = make_add(std::move(terms), ws);
  return obj;
}

Objective make_brascamp_lieb_problem(const std::vector<Matrix>& as, const std::vector<double>& ws) {
  if (as.empty()) throw ConfigError("Brascamp-Lieb: needs at least one map");
  if (ws.size() != as.size()) throw ConfigError("Brascamp-Lieb: one weight per map");
  const Eigen::Index d = as.front().rows();
  const Expression X = variable_x(d);
  std::vector<Expression> terms{apply_atom("logdet", {X})};
  std::vector<double> weights{-1.0};
  for (std::size_t i = 0; i < as.size(); ++i) {
    if (as[i].rows() != d) throw ShapeError("Brascamp-Lieb: every A_i must have d rows");
    // conjugation validates the full column rank requirement.
    terms.push_back(apply_atom("logdet", {apply_atom("conjugation", {X, Param(as[i], "A" + std::to_string(i + 1))})}));
    weights.push_back(ws[i]);
  }

  Objective obj;
  obj.dim = d;
  obj.value = [as, ws](const Matrix& x) {
    double s = -spd::logdet(x);
    for (std::size_t i = 0; i < as.size(); ++i)
      s += ws[i] * spd::logdet(spd::symmetrize(as[i].transpose() * x * as[i]));
    return s;
  };
  obj.euclidean_gradient = [as, ws](const Matrix& x) {
    Matrix g = -inverse_of(x);
    for (std::size_t i = 0; i < as.size(); ++i) {
      const Matrix inner = spd::symmetrize(as[i].transpose() * x * as[i]);
      g += ws[i] * as[i] * inverse_of(inner) * as[i].transpose();
    }
    return spd::symmetrize(g);
  };
  obj.expression = make_add(std::move(terms), std::move(weights));
  return obj;
}

Objective make_tyler_problem(const std::vector<Vector>& xs) {
  if (xs.empty()) throw ConfigError("Tyler: needs samples");
  const Eigen::Index d = xs.front().size();
  const auto n = static_cast<Eigen::Index>(xs.size());
  if (n < d) throw ConfigError("Tyler: needs at least d samples");
  for (const auto& x : xs) {
    if (x.size() != d) throw ShapeError("Tyler: samples have different lengths");
    if (x.isZero(0.0)) throw InvalidConstant("Tyler: zero sample vector");
  }

  Objective obj;
  obj.dim = d;
  obj.value = [xs, d](const Matrix& s) {
    const Matrix si = inverse_of(s);
    double acc = 0.0;
    for (const auto& x : xs) {
      const double q = x.dot(si * x);
      if (!(q > 0.0)) throw DomainError("Tyler: quadratic form is not positive");
      acc += std::log(q);
    }
    return acc / static_cast<double>(xs.size()) + spd::logdet(s) / static_cast<double>(d);
  };
  obj.euclidean_gradient = [xs, d](const Matrix& s) {
    const Matrix si = inverse_of(s);
    Matrix g = si / static_cast<double>(d);
    for (const auto& x : xs) {
      const Vector y = si * x;
      g -= (y * y.transpose()) / (x.dot(y) * static_cast<double>(xs.size()));
    }
    return spd::symmetrize(g);
  };

  const Expression S = variable_x(d);
  const Expression inv_s = apply_atom("inv", {S});
  std::vector<Expression> terms;
  std::vector<double> weights;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    terms.push_back(apply_atom("log_quad_form", {Param(NumericArg(xs[i]), "x" + std::to_string(i + 1)), inv_s}));
    weights.push_back(1.0 / static_cast<double>(xs.size()));
  }
  terms.push_back(apply_atom("logdet", {S}));
  weights.push_back(1.0 / static_cast<double>(d));
  obj.expression = make_add(std::move(terms), std::move(weights));
  return obj;
}

SPDMatrix trace_normalize(const SPDMatrix& s) {
  return SPDMatrix(s.matrix() * (static_cast<double>(s.dim()) / s.matrix().trace()));
}

double tyler_fixed_point_residual(const SPDMatrix& s, const std::vector<Vector>& xs) {
  const Matrix si = spd::inv(s).matrix();
  const auto d = static_cast<double>(s.dim());
  Matrix t = Matrix::Zero(s.dim(), s.dim());
  for (const auto& x : xs) t += (x * x.transpose()) / x.dot(si * x);
  t *= d / static_cast<double>(xs.size());
  return (s.matrix() - t).norm() / s.matrix().norm();
}

}  // namespace geocert::solver
