#pragma once

// Random well-formed expressions over one SPD variable "X". Every fixed
// parameter and matrix constant is named and recorded so that the trees can
// be printed and parsed back.

#include "generators.hpp"

#include "geocert/expression.hpp"

#include <map>
#include <string>
#include <vector>

namespace geocert::testing {

struct NamedValue {
  NumericArg value;
  Definiteness definiteness = Definiteness::None;
};

class ExpressionGenerator {
 public:
  ExpressionGenerator(Rng& rng, Eigen::Index dim) : rng_(rng), dim_(dim), x_(make_variable("X", Manifold::spd(dim))) {}

  Expression scalar(int depth) {
    if (depth <= 0) return scalar_atom(0);
    switch (rng_.integer(0, 9)) {
      case 0:
      case 1:
      case 2: return scalar_atom(depth - 1);
      case 3: {
        const int n = rng_.integer(2, 3);
        std::vector<Expression> kids;
        std::vector<double> ws;
        for (int i = 0; i < n; ++i) {
          kids.push_back(scalar(depth - 1));
          ws.push_back(pick({-2.0, -1.0, 0.5, 1.0, 3.0}));
        }
        return make_add(std::move(kids), std::move(ws));
      }
      case 4: return make_scalar_mul(pick({-1.5, -1.0, 0.25, 2.0}), scalar(depth - 1));
      case 5: return make_max({scalar(depth - 1), scalar(depth - 1)});
      case 6: return apply_atom("exp", {make_scalar_mul(0.1, scalar(depth - 1))});
      case 7: {
        const char* f = pick_name({"log", "neg_log", "abs"});
        return apply_atom(f, {scalar(depth - 1)});
      }
      case 8: return apply_atom("pow", {scalar(depth - 1), Param(pick({1.0, 1.5, 2.0}))});
      default:
        return make_add({scalar(depth - 1), make_const_scalar(pick({-3.0, 0.5, 2.0}))});
    }
  }

  Expression matrix(int depth) {
    if (depth <= 0 || rng_.coin(0.3)) return rng_.coin(0.85) ? x_ : constant_pd();
    const Expression inner = matrix(depth - 1);
    switch (rng_.integer(0, 5)) {
      case 0: return apply_atom("inv", {inner});
      case 1: return apply_atom("conjugation", {inner, named(rng_.invertible(dim_))});
      case 2: return apply_atom("adjoint", {inner});
      case 3: {
        Matrix m = rng_.spd(dim_, 10.0);
        return apply_atom("hadamard_product", {inner, named(m)});
      }
      case 4: return apply_atom("diag_matrix", {inner});
      default: {
        std::vector<Matrix> ys{rng_.gaussian(dim_, dim_)};
        if (rng_.coin()) ys.push_back(rng_.gaussian(dim_, dim_));
        const Matrix b = rng_.spd(dim_, 10.0);
        return apply_atom("positive_affine",
                          {inner, named(NumericArg(ys)), named(b), Param(rng_.coin(0.7) ? 1.0 : -1.0)});
      }
    }
  }

  Expression scalar_atom(int depth) {
    const Expression m = matrix(depth);
    const auto k = static_cast<double>(rng_.integer(1, static_cast<int>(dim_)));
    switch (rng_.integer(0, 12)) {
      case 0: return apply_atom("logdet", {m});
      case 1: return apply_atom("tr", {m});
      case 2: return apply_atom("sum", {m});
      case 3: return apply_atom("eigmax", {m});
      case 4: return apply_atom("quad_form", {named(rng_.gaussian(dim_)), m});
      case 5: {
        std::vector<Vector> hs{rng_.gaussian(dim_), rng_.gaussian(dim_)};
        return apply_atom("log_quad_form", {named(NumericArg(hs)), m});
      }
      case 6: return apply_atom("eigsummax", {m, Param(k)});
      case 7: return apply_atom("schatten_norm", {m, Param(pick({1.0, 2.0, 3.5}))});
      case 8: return apply_atom("sum_log_eigmax", {m, Param(k)});
      case 9: return apply_atom("sum_pow_log_eigmax", {m, Param(k), Param(pick({1.0, 2.0}))});
      case 10: return apply_atom("sdivergence", {m, rng_.coin() ? constant_pd() : matrix(depth)});
      case 11: return apply_atom("distance", {rng_.coin() ? constant_pd() : matrix(depth), m});
      default: return apply_atom("entrywise_l1", {m});
    }
  }

  const std::map<std::string, NamedValue>& constants() const { return constants_; }
  const Expression& variable() const { return x_; }

 private:
  template <class T>
  T pick(std::initializer_list<T> xs) {
    return *(xs.begin() + rng_.integer(0, static_cast<int>(xs.size()) - 1));
  }
  const char* pick_name(std::initializer_list<const char*> xs) { return pick(xs); }

  Param named(NumericArg v) {
    std::string name = "P" + std::to_string(constants_.size());
    constants_.emplace(name, NamedValue{v, Definiteness::None});
    return Param(std::move(v), std::move(name));
  }

  Expression constant_pd() {
    std::string name = "C" + std::to_string(constants_.size());
    Matrix m = rng_.spd(dim_, 10.0);
    constants_.emplace(name, NamedValue{m, Definiteness::PD});
    return make_const_matrix(std::move(m), Definiteness::PD, name);
  }

  Rng& rng_;
  Eigen::Index dim_;
  Expression x_;
  std::map<std::string, NamedValue> constants_;
};

}  // namespace geocert::testing
