#include "generators.hpp"

#include "geocert/analysis.hpp"
#include "geocert/errors.hpp"
#include "geocert/expression.hpp"

#include <gtest/gtest.h>

namespace geocert {
namespace {

using spd::Matrix;
using spd::Vector;
using testing::Rng;

Matrix sigma2() {
  Matrix s(3, 3);
  s << 1.0, 0.5, -0.6, 0.5, 1.2, 0.4, -0.6, 0.4, 1.0;
  return s;
}

TEST(Scope, DeclarationsAreIdempotentAndConsistent) {
  Scope scope;
  const Expression a = scope.variable("X", Manifold::spd(5));
  const Expression b = scope.variable("X", Manifold::spd(5));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.kind(), NodeKind::Variable);
  EXPECT_EQ(a.dim(), 5);
  EXPECT_THROW(scope.variable("X", Manifold::spd(3)), DeclarationConflict);
  EXPECT_EQ(scope.find("X"), Manifold::spd(5));
  EXPECT_FALSE(scope.find("Y").has_value());
  EXPECT_EQ(analyze(apply_atom("tr", {a}), Manifold::spd(5)).trace.front().sign, Sign::Positive);
}

TEST(Constants, DefinitenessIsValidated) {
  EXPECT_NO_THROW(make_const_matrix(Matrix::Identity(3, 3), Definiteness::PD));
  Matrix indefinite(2, 2);
  indefinite << 1, 0, 0, -1;
  EXPECT_THROW(make_const_matrix(indefinite, Definiteness::PD), InvalidConstant);
  EXPECT_THROW(make_const_matrix(indefinite, Definiteness::PSD), InvalidConstant);
  EXPECT_NO_THROW(make_const_matrix(indefinite, Definiteness::None));
  EXPECT_NO_THROW(make_const_matrix(sigma2(), Definiteness::PD));
  Matrix psd(2, 2);
  psd << 1, 1, 1, 1;
  EXPECT_NO_THROW(make_const_matrix(psd, Definiteness::PSD));
  EXPECT_THROW(make_const_matrix(psd, Definiteness::PD), InvalidConstant);
}

TEST(ApplyAtom, ChecksArityKindsAndDimensions) {
  const Expression x = make_variable("X", Manifold::spd(5));
  const Expression ld = apply_atom("logdet", {x});
  EXPECT_TRUE(ld.is_scalar());
  EXPECT_EQ(ld.kind(), NodeKind::AtomApply);

  Rng rng(1);
  const Expression c = apply_atom("conjugation", {x, Param(rng.gaussian(5, 5))});
  EXPECT_FALSE(c.is_scalar());
  EXPECT_EQ(c.dim(), 5);
  const Expression c3 = apply_atom("conjugation", {x, Param(rng.gaussian(5, 3))});
  EXPECT_EQ(c3.dim(), 3);

  EXPECT_THROW(apply_atom("logdet", {x, x}), SignatureError);
  EXPECT_THROW(apply_atom("logdet", {}), SignatureError);
  EXPECT_THROW(apply_atom("logdet", {ld}), SignatureError);
  EXPECT_THROW(apply_atom("no_such_atom", {x}), SignatureError);
  const Expression y = make_variable("Y", Manifold::spd(3));
  EXPECT_THROW(apply_atom("sdivergence", {x, y}), SignatureError);
  EXPECT_THROW(apply_atom("quad_form", {Param(Vector(Vector::Ones(3))), x}), SignatureError);
}

TEST(ApplyAtom, ValidatesParameters) {
  const Expression x = make_variable("X", Manifold::spd(3));
  Rng rng(2);
  EXPECT_THROW(apply_atom("eigsummax", {x, Param(0.0)}), InvalidConstant);
  EXPECT_THROW(apply_atom("eigsummax", {x, Param(4.0)}), InvalidConstant);
  EXPECT_THROW(apply_atom("eigsummax", {x, Param(1.5)}), InvalidConstant);
  EXPECT_THROW(apply_atom("schatten_norm", {x, Param(0.5)}), InvalidConstant);
  EXPECT_THROW(apply_atom("quad_form", {Param(Vector(Vector::Zero(3))), x}), InvalidConstant);
  Matrix rank_deficient = Matrix::Zero(3, 2);
  rank_deficient(0, 0) = 1.0;
  EXPECT_THROW(apply_atom("conjugation", {x, Param(rank_deficient)}), InvalidConstant);
  Matrix zero_diag = Matrix::Identity(3, 3);
  zero_diag(1, 1) = 0.0;
  EXPECT_THROW(apply_atom("hadamard_product", {x, Param(zero_diag)}), InvalidConstant);
  const std::vector<Matrix> ys{rng.gaussian(3, 2)};
  EXPECT_NO_THROW(apply_atom("positive_affine",
                             {x, Param(NumericArg(ys), "Ys"), Param(Matrix(Matrix::Zero(2, 2))), Param(1.0)}));
  EXPECT_THROW(apply_atom("positive_affine",
                          {x, Param(NumericArg(ys), "Ys"), Param(Matrix(Matrix::Zero(2, 2))), Param(2.0)}),
               InvalidConstant);
  EXPECT_THROW(apply_atom("pow", {apply_atom("tr", {x}), Param(0.5)}), InvalidConstant);
}

TEST(ApplyAtom, ManifoldSlotsAcceptConstants) {
  const Expression x = make_variable("X", Manifold::spd(2));
  const Expression s = apply_atom("sdivergence", {x, Param(Matrix(Matrix::Identity(2, 2)))});
  EXPECT_EQ(s.children().size(), 2u);
  EXPECT_EQ(s.children()[1].kind(), NodeKind::ConstMatrix);
  Matrix indefinite(2, 2);
  indefinite << 1, 0, 0, -1;
  EXPECT_THROW(apply_atom("sdivergence", {x, Param(indefinite)}), InvalidConstant);
}

TEST(Registry, CatalogIsPreloaded) {
  const AtomRegistry& reg = default_registry();
  for (const char* id : {"logdet", "tr", "sum", "sdivergence", "distance", "quad_form", "eigmax", "log_quad_form",
                         "eigsummax", "schatten_norm", "sum_log_eigmax", "sum_pow_log_eigmax", "conjugation",
                         "adjoint", "inv", "hadamard_product", "diag_matrix", "positive_affine", "exp", "log",
                         "neg_log", "pow", "abs", "entrywise_l1"}) {
    EXPECT_TRUE(reg.contains(id)) << id;
    EXPECT_NE(reg.lookup(id), nullptr) << id;
  }
  EXPECT_EQ(reg.lookup("missing"), nullptr);
}

TEST(Registry, RejectsDuplicatesAndAcceptsCustomAtoms) {
  AtomRegistry reg = AtomRegistry::with_catalog();
  AtomSignature dup{"logdet", {ArgKind::Manifold}, ResultKind::Scalar};
  EXPECT_THROW(reg.register_atom(dup, [](std::span<const NumericArg>) -> Value { return 0.0; }),
               RegistrationConflict);

  AtomSignature sig{"frobenius_sq", {ArgKind::Manifold}, ResultKind::Scalar, Sign::Positive,
                    GCurvature::GConvex, GMonotonicity::GIncreasing, ECurvature::Convex};
  reg.register_atom(sig, [](std::span<const NumericArg> a) -> Value {
    return std::get<Matrix>(a[0]).squaredNorm();
  });
  const Expression x = make_variable("X", Manifold::spd(3));
  const Expression e = apply_atom(reg, "frobenius_sq", {x});
  const AnalysisReport r = analyze(e, Manifold::spd(3));
  EXPECT_EQ(r.gcurvature, GCurvature::GConvex);
  EXPECT_EQ(r.ecurvature, ECurvature::Convex);
  EXPECT_EQ(r.sign, Sign::Positive);
}

TEST(Registry, RejectsEvaluatorOfWrongResultKind) {
  AtomRegistry reg;
  AtomSignature sig{"bad", {ArgKind::Manifold}, ResultKind::Matrix};
  EXPECT_THROW(reg.register_atom(sig, [](std::span<const NumericArg>) -> Value { return 1.0; }),
               RegistrationConflict);
}

TEST(Builders, SumsProductsAndMaxima) {
  const Expression x = make_variable("X", Manifold::spd(2));
  const Expression t = apply_atom("tr", {x});
  const Expression l = apply_atom("logdet", {x});
  const Expression s = make_add({t, l}, {2.0, -1.0});
  EXPECT_EQ(s.kind(), NodeKind::Add);
  EXPECT_EQ(s.weights(), (std::vector<double>{2.0, -1.0}));
  EXPECT_EQ(make_add({t, l}).weights(), (std::vector<double>{1.0, 1.0}));
  EXPECT_THROW(make_add({t, x}), SignatureError);
  EXPECT_THROW(make_add({t, l}, {1.0}), SignatureError);
  EXPECT_THROW(make_max({}), SignatureError);
  EXPECT_EQ(make_product(t, l).kind(), NodeKind::Product);
  EXPECT_EQ((t - l).kind(), NodeKind::Add);
  EXPECT_EQ((2.0 * t).kind(), NodeKind::ScalarMul);
}

TEST(Expression, StructuralEquality) {
  Rng a(3);
  Rng b(3);
  auto build = [](Rng& rng) {
    const Expression x = make_variable("X", Manifold::spd(3));
    const Matrix m = rng.gaussian(3, 3);
    return make_add({apply_atom("logdet", {apply_atom("conjugation", {x, Param(m)})}),
                     make_scalar_mul(-1.0, apply_atom("logdet", {x}))});
  };
  EXPECT_EQ(build(a), build(b));
  Rng c(4);
  EXPECT_FALSE(build(a) == build(c));
  const Expression x = make_variable("X", Manifold::spd(3));
  EXPECT_FALSE(apply_atom("tr", {x}) == apply_atom("sum", {x}));
  EXPECT_FALSE(make_variable("X", Manifold::spd(3)) == make_variable("X", Manifold::spd(2)));
  EXPECT_EQ(annotate(apply_atom("tr", {x})), apply_atom("tr", {x}));
}

TEST(Expression, EvaluationAndQueries) {
  const Expression x = make_variable("X", Manifold::spd(2));
  const Expression y = make_variable("Y", Manifold::spd(2));
  const Expression e = make_add({apply_atom("tr", {x}), apply_atom("logdet", {y})}, {1.0, 2.0});
  Matrix xv(2, 2);
  xv << 2, 0, 0, 3;
  Bindings b{{"X", xv}, {"Y", 2.0 * Matrix::Identity(2, 2)}};
  EXPECT_NEAR(evaluate_scalar(e, b), 5.0 + 4.0 * std::log(2.0), 1e-14);
  EXPECT_THROW(evaluate_scalar(e, Bindings{{"X", xv}}), SignatureError);
  EXPECT_EQ(node_count(e), 5u);
  const auto vars = collect_variables(e);
  ASSERT_EQ(vars.size(), 2u);
  EXPECT_EQ(vars[0].first, "X");
  EXPECT_EQ(vars[1].first, "Y");
  EXPECT_FALSE(e.is_constant());
  EXPECT_TRUE(apply_atom("tr", {Param(Matrix(Matrix::Identity(2, 2)))}).is_constant());
  EXPECT_EQ(label(e), "ADD");
  EXPECT_EQ(label(x), "X");
}

TEST(Expression, MatrixValuedEvaluation) {
  const Expression x = make_variable("X", Manifold::spd(2));
  Matrix xv(2, 2);
  xv << 2, 1, 1, 2;
  const Value v = evaluate(apply_atom("inv", {x}), Bindings{{"X", xv}});
  EXPECT_TRUE(std::get<Matrix>(v).isApprox(xv.inverse()));
}

}  // namespace
}  // namespace geocert
