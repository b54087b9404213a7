#pragma once

#include <optional>

#include "meshtrack/geometry.hpp"

namespace meshtrack {

// Affine combination weights over a feature triple, beta1+beta2+beta3 = 1.
struct BarycentricTriple {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
};

// Twice-area degeneracy floor: triples spanning less than this area (px^2)
// are rejected rather than risk a wildly extrapolated mapping.
constexpr double kDegenerateTriangleArea = 1e-6;

// Solves beta1*f1 + beta2*f2 + beta3*f3 = v with beta1+beta2+beta3 = 1 (a
// 3x3 linear system). Returns nullopt for (near-)collinear triples; the
// caller skips the vertex.
std::optional<BarycentricTriple> solve_barycentric(const Vec2& f1, const Vec2& f2, const Vec2& f3,
                                                   const Vec2& v);

// Transfers the combination through the matched positions:
// v' = beta1*f1' + beta2*f2' + beta3*f3'. Affine maps of the feature triple
// move v' by exactly the same affine map.
Vec2 map_vertex(const BarycentricTriple& triple, const Vec2& f1, const Vec2& f2, const Vec2& f3);

}  // namespace meshtrack
