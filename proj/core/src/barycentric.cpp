#include "meshtrack/barycentric.hpp"

#include <cmath>

namespace meshtrack {

std::optional<BarycentricTriple> solve_barycentric(const Vec2& f1, const Vec2& f2, const Vec2& f3,
                                                   const Vec2& v) {
  // det of [[f1-f3, f2-f3]] is twice the signed triangle area.
  const double det = cross2(f3, f1, f2);
  if (std::abs(det) < 2.0 * kDegenerateTriangleArea) return std::nullopt;

  const double b1 = ((f2.y - f3.y) * (v.x - f3.x) + (f3.x - f2.x) * (v.y - f3.y)) / det;
  const double b2 = ((f3.y - f1.y) * (v.x - f3.x) + (f1.x - f3.x) * (v.y - f3.y)) / det;
  return BarycentricTriple{b1, b2, 1.0 - b1 - b2};
}

Vec2 map_vertex(const BarycentricTriple& t, const Vec2& f1, const Vec2& f2, const Vec2& f3) {
  return {t.beta1 * f1.x + t.beta2 * f2.x + t.beta3 * f3.x,
          t.beta1 * f1.y + t.beta2 * f2.y + t.beta3 * f3.y};
}

}  // namespace meshtrack
