#include "geocert/analysis.hpp"

#include "geocert/errors.hpp"

#include <algorithm>
#include <functional>

namespace geocert {

namespace {

struct Sides {
  bool convex;
  bool concave;
};

// Both one-sided certificates of outer(inner_1, ..., inner_n) for an outer
// function that is convex and/or concave with the given monotonicity.
Sides compose_sides(bool outer_convex, bool outer_concave, GMonotonicity mono,
                    std::span<const GCurvature> inners) {
  auto side_ok = [&](bool outer_ok, bool want_convex) {
    if (!outer_ok) return false;
    return std::all_of(inners.begin(), inners.end(), [&](GCurvature in) {
      if (in == GCurvature::GLinear) return true;
      const bool same = want_convex ? is_gconvex(in) : is_gconcave(in);
      const bool opposite = want_convex ? is_gconcave(in) : is_gconvex(in);
      return (mono == GMonotonicity::GIncreasing && same) ||
             (mono == GMonotonicity::GDecreasing && opposite);
    });
  };
  return {side_ok(outer_convex, true), side_ok(outer_concave, false)};
}

Sign product_sign(Sign a, Sign b) {
  if (a == Sign::AnySign || b == Sign::AnySign) return Sign::AnySign;
  return a == b ? Sign::Positive : Sign::Negative;
}

Sign weighted_sign(Sign s, double w) { return w < 0.0 ? negate(s) : s; }

// Sign usable for domain checks: nominal catalog signs are not relied on.
Sign domain_sign_of(const Expression& e) {
  const Sign s = *e.metadata().sign;
  if (e.kind() == NodeKind::AtomApply && e.atom_metadata().nominal_sign) return Sign::AnySign;
  return s;
}

// Value of a constant scalar subtree.
double constant_value(const Expression& e) { return evaluate_scalar(e, Bindings{}); }

// Product of a constant and a nonconstant factor acts as a scaling.
std::optional<std::pair<double, std::size_t>> scaling_of(const Expression& product) {
  const auto& c = product.children();
  for (std::size_t i = 0; i < 2; ++i) {
    if (c[i].is_constant()) {
      try {
        return std::make_pair(constant_value(c[i]), 1 - i);
      } catch (const Error&) {
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

NodeMetadata with_meta(const Expression& e) { return e.metadata(); }

const char* kSignNote = "sign metadata per DGCP catalog";

}  // namespace

// ---------------------------------------------------------------------------
// Rule tables

GCurvature combine_add(std::span<const AddTerm> terms) {
  GCurvature out = GCurvature::GLinear;
  for (const AddTerm& t : terms) {
    if (t.weight == 0.0) continue;
    out = join(out, t.weight < 0.0 ? mirror(t.curvature) : t.curvature);
  }
  return out;
}

GCurvature combine_max(std::span<const GCurvature> children) {
  if (children.size() == 1) return children[0];
  const bool all_convex = std::all_of(children.begin(), children.end(), is_gconvex);
  return all_convex ? GCurvature::GConvex : GCurvature::GUnknown;
}

GCurvature compose_scalar(ECurvature outer, GMonotonicity mono, GCurvature inner) {
  const GCurvature inners[] = {inner};
  const Sides s = compose_sides(is_convex(outer), is_concave(outer), mono, inners);
  return gcurvature_from(s.convex, s.concave);
}

GCurvature compose_loewner(const AtomMetadata& outer, std::span<const GCurvature> inners) {
  const Sides s = compose_sides(is_gconvex(outer.gcurv), is_gconcave(outer.gcurv), outer.gmono, inners);
  return gcurvature_from(s.convex, s.concave);
}

GCurvature compose_loewner(const AtomSignature& outer, std::span<const GCurvature> inners) {
  AtomMetadata m;
  m.gcurv = outer.gcurv;
  m.gmono = outer.gmono;
  return compose_loewner(m, inners);
}

GCurvature compose_inverse(GCurvature inner) {
  return inner == GCurvature::GLinear ? GCurvature::GLinear : GCurvature::GUnknown;
}

ECurvature compose_euclidean(ECurvature outer, GMonotonicity mono, std::span<const ECurvature> inners) {
  std::vector<GCurvature> as_g;
  for (ECurvature e : inners) {
    switch (e) {
      case ECurvature::Affine: as_g.push_back(GCurvature::GLinear); break;
      case ECurvature::Convex: as_g.push_back(GCurvature::GConvex); break;
      case ECurvature::Concave: as_g.push_back(GCurvature::GConcave); break;
      case ECurvature::UnknownCurvature: as_g.push_back(GCurvature::GUnknown); break;
    }
  }
  const Sides s = compose_sides(is_convex(outer), is_concave(outer), mono, as_g);
  return ecurvature_from(s.convex, s.concave);
}

// ---------------------------------------------------------------------------
// Passes

Expression propagate_sign(const Expression& e) {
  std::vector<Expression> kids;
  for (const auto& c : e.children()) kids.push_back(propagate_sign(c));
  NodeMetadata meta = with_meta(e);

  Sign s = Sign::AnySign;
  switch (e.kind()) {
    case NodeKind::Variable: s = Sign::Positive; break;
    case NodeKind::ConstScalar: s = e.scalar_value() >= 0.0 ? Sign::Positive : Sign::Negative; break;
    case NodeKind::ConstMatrix:
      s = e.definiteness() == Definiteness::None ? Sign::AnySign : Sign::Positive;
      break;
    case NodeKind::ScalarMul:
      s = e.scalar_value() == 0.0 ? Sign::Positive : weighted_sign(*kids[0].metadata().sign, e.scalar_value());
      break;
    case NodeKind::Add: {
      bool all_pos = true;
      bool all_neg = true;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (e.weights()[i] == 0.0) continue;
        const Sign k = weighted_sign(*kids[i].metadata().sign, e.weights()[i]);
        all_pos = all_pos && k == Sign::Positive;
        all_neg = all_neg && k == Sign::Negative;
      }
      s = all_pos ? Sign::Positive : (all_neg ? Sign::Negative : Sign::AnySign);
      break;
    }
    case NodeKind::MaxOf: {
      const bool any_pos = std::any_of(kids.begin(), kids.end(),
                                       [](const Expression& k) { return *k.metadata().sign == Sign::Positive; });
      const bool all_neg = std::all_of(kids.begin(), kids.end(),
                                       [](const Expression& k) { return *k.metadata().sign == Sign::Negative; });
      s = any_pos ? Sign::Positive : (all_neg ? Sign::Negative : Sign::AnySign);
      break;
    }
    case NodeKind::Product:
      s = product_sign(*kids[0].metadata().sign, *kids[1].metadata().sign);
      break;
    case NodeKind::AtomApply: s = e.atom_metadata().sign; break;
  }
  meta.sign = s;
  return e.rebuild(std::move(kids), std::move(meta));
}

namespace {

bool has_signs(const Expression& e) {
  if (!e.metadata().sign) return false;
  return std::all_of(e.children().begin(), e.children().end(), has_signs);
}

Expression gcurv_pass(const Expression& e) {
  std::vector<Expression> kids;
  for (const auto& c : e.children()) kids.push_back(gcurv_pass(c));
  NodeMetadata meta = with_meta(e);
  std::vector<GCurvature> in;
  for (const auto& k : kids) in.push_back(*k.metadata().gcurvature);

  GCurvature g = GCurvature::GUnknown;
  std::string rule;
  std::string note;
  switch (e.kind()) {
    case NodeKind::Variable:
      g = GCurvature::GLinear;
      rule = "variable";
      break;
    case NodeKind::ConstMatrix:
    case NodeKind::ConstScalar:
      g = GCurvature::GLinear;
      rule = "constant";
      break;
    case NodeKind::ScalarMul: {
      const AddTerm t[] = {{in[0], e.scalar_value()}};
      g = combine_add(t);
      rule = "scalar_mul";
      break;
    }
    case NodeKind::Add: {
      std::vector<AddTerm> terms;
      for (std::size_t i = 0; i < in.size(); ++i) terms.push_back({in[i], e.weights()[i]});
      g = combine_add(terms);
      rule = "combine_add";
      break;
    }
    case NodeKind::MaxOf:
      g = combine_max(in);
      rule = "combine_max";
      break;
    case NodeKind::Product: {
      rule = "product";
      if (e.is_constant()) {
        g = GCurvature::GLinear;
      } else if (auto sc = scaling_of(e)) {
        const AddTerm t[] = {{in[sc->second], sc->first}};
        g = combine_add(t);
        rule = "constant_scaling";
      } else {
        g = GCurvature::GUnknown;
        note = "products of nonconstant subexpressions are not certifiable";
      }
      break;
    }
    case NodeKind::AtomApply: {
      const AtomMetadata& am = e.atom_metadata();
      if (e.is_constant()) {
        g = GCurvature::GLinear;
        rule = "constant";
        break;
      }
      if (am.rule == CompositionRule::Inverse) {
        rule = "compose_inverse";
        g = compose_inverse(in[0]);
        if (g == GCurvature::GUnknown)
          note = "inverse of a non-GLinear matrix subexpression is not certified";
        break;
      }
      const bool scalar_args = std::all_of(kids.begin(), kids.end(),
                                           [](const Expression& k) { return k.is_scalar(); });
      if (am.domain_sign) {
        const bool ok = std::all_of(kids.begin(), kids.end(), [&](const Expression& k) {
          return domain_sign_of(k) == *am.domain_sign;
        });
        if (!ok) {
          rule = scalar_args ? "compose_scalar" : "compose_loewner";
          note = e.atom().signature.id + ": argument not known to be " +
                 std::string(to_string(*am.domain_sign)) + " (domain restriction)";
          g = GCurvature::GUnknown;
          break;
        }
      }
      if (scalar_args && !kids.empty()) {
        rule = "compose_scalar";
        GCurvature acc = GCurvature::GLinear;
        bool first = true;
        for (GCurvature c : in) {
          const GCurvature r = compose_scalar(am.ecurv, am.gmono, c);
          acc = first ? r : join(acc, r);
          first = false;
        }
        g = acc;
      } else {
        rule = "compose_loewner";
        g = compose_loewner(am, in);
      }
      if (am.nominal_sign) note = kSignNote;
      break;
    }
  }
  meta.gcurvature = g;
  meta.rule = std::move(rule);
  if (!note.empty()) meta.note = std::move(note);
  return e.rebuild(std::move(kids), std::move(meta));
}

Expression ecurv_pass(const Expression& e) {
  std::vector<Expression> kids;
  for (const auto& c : e.children()) kids.push_back(ecurv_pass(c));
  NodeMetadata meta = with_meta(e);
  std::vector<ECurvature> in;
  for (const auto& k : kids) in.push_back(*k.metadata().ecurvature);

  auto scaled = [](ECurvature c, double w) {
    if (w == 0.0) return ECurvature::Affine;
    return w < 0.0 ? mirror(c) : c;
  };

  ECurvature out = ECurvature::UnknownCurvature;
  switch (e.kind()) {
    case NodeKind::Variable:
    case NodeKind::ConstMatrix:
    case NodeKind::ConstScalar:
      out = ECurvature::Affine;
      break;
    case NodeKind::ScalarMul: out = scaled(in[0], e.scalar_value()); break;
    case NodeKind::Add:
      out = ECurvature::Affine;
      for (std::size_t i = 0; i < in.size(); ++i) out = join(out, scaled(in[i], e.weights()[i]));
      break;
    case NodeKind::MaxOf:
      if (in.size() == 1) {
        out = in[0];
      } else {
        out = std::all_of(in.begin(), in.end(), is_convex) ? ECurvature::Convex
                                                           : ECurvature::UnknownCurvature;
      }
      break;
    case NodeKind::Product:
      if (e.is_constant()) {
        out = ECurvature::Affine;
      } else if (auto sc = scaling_of(e)) {
        out = scaled(in[sc->second], sc->first);
      }
      break;
    case NodeKind::AtomApply: {
      const AtomMetadata& am = e.atom_metadata();
      if (e.is_constant()) {
        out = ECurvature::Affine;
        break;
      }
      if (am.domain_sign) {
        const bool ok = std::all_of(kids.begin(), kids.end(), [&](const Expression& k) {
          return domain_sign_of(k) == *am.domain_sign;
        });
        if (!ok) break;
      }
      out = compose_euclidean(am.ecurv, am.gmono, in);
      break;
    }
  }
  meta.ecurvature = out;
  return e.rebuild(std::move(kids), std::move(meta));
}

void collect_trace(const Expression& e, const std::string& path, std::vector<TraceEntry>& out) {
  for (std::size_t i = 0; i < e.children().size(); ++i) {
    const std::string child = (path == "/" ? "/" : path + "/") + std::to_string(i);
    collect_trace(e.children()[i], child, out);
  }
  TraceEntry t;
  t.path = path;
  t.label = label(e);
  t.rule = e.metadata().rule;
  for (const auto& c : e.children()) t.inputs.push_back(*c.metadata().gcurvature);
  t.sign = *e.metadata().sign;
  t.gcurvature = *e.metadata().gcurvature;
  t.ecurvature = *e.metadata().ecurvature;
  t.note = e.metadata().note;
  out.push_back(std::move(t));
}

}  // namespace

Expression propagate_gcurvature(const Expression& e) {
  return gcurv_pass(has_signs(e) ? e : propagate_sign(e));
}

Expression propagate_ecurvature(const Expression& e) {
  return ecurv_pass(has_signs(e) ? e : propagate_sign(e));
}

Expression annotate(const Expression& e) {
  return propagate_gcurvature(propagate_ecurvature(propagate_sign(e)));
}

AnalysisReport analyze(const Expression& e, const Manifold& m) {
  if (!e.is_scalar()) throw ShapeError("analyze: the objective must be scalar-valued");
  for (const auto& [name, manifold] : collect_variables(e)) {
    if (!(manifold == m))
      throw DomainError("analyze: variable '" + name + "' lives on SPD(" + std::to_string(manifold.dim) +
                        "), expected SPD(" + std::to_string(m.dim) + ")");
  }
  const Expression annotated = annotate(e);
  AnalysisReport r;
  r.sign = *annotated.metadata().sign;
  r.gcurvature = *annotated.metadata().gcurvature;
  r.ecurvature = *annotated.metadata().ecurvature;
  collect_trace(annotated, "/", r.trace);
  return r;
}

}  // namespace geocert
