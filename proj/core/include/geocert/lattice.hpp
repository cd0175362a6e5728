#pragma once

#include <optional>
#include <string_view>

namespace geocert {

enum class Sign { Positive, Negative, AnySign };

/// Geodesic curvature. GLinear sits below GConvex and GConcave; GUnknown is
/// the top element.
enum class GCurvature { GLinear, GConvex, GConcave, GUnknown };

enum class GMonotonicity { GIncreasing, GDecreasing, GAnyMono };

/// Euclidean curvature, same lattice shape as GCurvature.
enum class ECurvature { Affine, Convex, Concave, UnknownCurvature };

std::string_view to_string(Sign s);
std::string_view to_string(GCurvature c);
std::string_view to_string(GMonotonicity m);
std::string_view to_string(ECurvature c);

std::optional<Sign> parse_sign(std::string_view s);
std::optional<GCurvature> parse_gcurvature(std::string_view s);
std::optional<GMonotonicity> parse_gmonotonicity(std::string_view s);
std::optional<ECurvature> parse_ecurvature(std::string_view s);

Sign negate(Sign s);
GCurvature mirror(GCurvature c);
GMonotonicity mirror(GMonotonicity m);
ECurvature mirror(ECurvature c);

/// Least upper bound.
GCurvature join(GCurvature a, GCurvature b);
ECurvature join(ECurvature a, ECurvature b);

/// Greatest lower bound. The meet of GConvex and GConcave is GLinear.
GCurvature meet(GCurvature a, GCurvature b);
ECurvature meet(ECurvature a, ECurvature b);

/// Partial order: a <= b when a is at least as precise as b.
bool leq(GCurvature a, GCurvature b);
bool leq(ECurvature a, ECurvature b);

inline bool is_gconvex(GCurvature c) {
  return c == GCurvature::GLinear || c == GCurvature::GConvex;
}
inline bool is_gconcave(GCurvature c) {
  return c == GCurvature::GLinear || c == GCurvature::GConcave;
}
inline bool is_convex(ECurvature c) {
  return c == ECurvature::Affine || c == ECurvature::Convex;
}
inline bool is_concave(ECurvature c) {
  return c == ECurvature::Affine || c == ECurvature::Concave;
}

/// Builds the curvature value from two independent one-sided certificates.
GCurvature gcurvature_from(bool convex, bool concave);
ECurvature ecurvature_from(bool convex, bool concave);

}  // namespace geocert
