#include "geocert/lattice.hpp"

namespace geocert {

std::string_view to_string(Sign s) {
  switch (s) {
    case Sign::Positive: return "Positive";
    case Sign::Negative: return "Negative";
    case Sign::AnySign: return "AnySign";
  }
  return "AnySign";
}

std::string_view to_string(GCurvature c) {
  switch (c) {
    case GCurvature::GLinear: return "GLinear";
    case GCurvature::GConvex: return "GConvex";
    case GCurvature::GConcave: return "GConcave";
    case GCurvature::GUnknown: return "GUnknown";
  }
  return "GUnknown";
}

std::string_view to_string(GMonotonicity m) {
  switch (m) {
    case GMonotonicity::GIncreasing: return "GIncreasing";
    case GMonotonicity::GDecreasing: return "GDecreasing";
    case GMonotonicity::GAnyMono: return "GAnyMono";
  }
  return "GAnyMono";
}

std::string_view to_string(ECurvature c) {
  switch (c) {
    case ECurvature::Affine: return "Affine";
    case ECurvature::Convex: return "Convex";
    case ECurvature::Concave: return "Concave";
    case ECurvature::UnknownCurvature: return "UnknownCurvature";
  }
  return "UnknownCurvature";
}

std::optional<Sign> parse_sign(std::string_view s) {
  for (Sign v : {Sign::Positive, Sign::Negative, Sign::AnySign})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<GCurvature> parse_gcurvature(std::string_view s) {
  for (GCurvature v : {GCurvature::GLinear, GCurvature::GConvex,
                       GCurvature::GConcave, GCurvature::GUnknown})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<GMonotonicity> parse_gmonotonicity(std::string_view s) {
  for (GMonotonicity v : {GMonotonicity::GIncreasing, GMonotonicity::GDecreasing,
                          GMonotonicity::GAnyMono})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<ECurvature> parse_ecurvature(std::string_view s) {
  for (ECurvature v : {ECurvature::Affine, ECurvature::Convex,
                       ECurvature::Concave, ECurvature::UnknownCurvature})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

Sign negate(Sign s) {
  switch (s) {
    case Sign::Positive: return Sign::Negative;
    case Sign::Negative: return Sign::Positive;
    default: return Sign::AnySign;
  }
}

GCurvature mirror(GCurvature c) {
  switch (c) {
    case GCurvature::GConvex: return GCurvature::GConcave;
    case GCurvature::GConcave: return GCurvature::GConvex;
    default: return c;
  }
}

GMonotonicity mirror(GMonotonicity m) {
  switch (m) {
    case GMonotonicity::GIncreasing: return GMonotonicity::GDecreasing;
    case GMonotonicity::GDecreasing: return GMonotonicity::GIncreasing;
    default: return m;
  }
}

ECurvature mirror(ECurvature c) {
  switch (c) {
    case ECurvature::Convex: return ECurvature::Concave;
    case ECurvature::Concave: return ECurvature::Convex;
    default: return c;
  }
}

GCurvature gcurvature_from(bool convex, bool concave) {
  if (convex && concave) return GCurvature::GLinear;
  if (convex) return GCurvature::GConvex;
  if (concave) return GCurvature::GConcave;
  return GCurvature::GUnknown;
}

ECurvature ecurvature_from(bool convex, bool concave) {
  if (convex && concave) return ECurvature::Affine;
  if (convex) return ECurvature::Convex;
  if (concave) return ECurvature::Concave;
  return ECurvature::UnknownCurvature;
}

GCurvature join(GCurvature a, GCurvature b) {
  return gcurvature_from(is_gconvex(a) && is_gconvex(b),
                         is_gconcave(a) && is_gconcave(b));
}

ECurvature join(ECurvature a, ECurvature b) {
  return ecurvature_from(is_convex(a) && is_convex(b),
                         is_concave(a) && is_concave(b));
}

GCurvature meet(GCurvature a, GCurvature b) {
  return gcurvature_from(is_gconvex(a) || is_gconvex(b),
                         is_gconcave(a) || is_gconcave(b));
}

ECurvature meet(ECurvature a, ECurvature b) {
  return ecurvature_from(is_convex(a) || is_convex(b),
                         is_concave(a) || is_concave(b));
}

bool leq(GCurvature a, GCurvature b) { return join(a, b) == b; }
bool leq(ECurvature a, ECurvature b) { return join(a, b) == b; }

}  // namespace geocert
