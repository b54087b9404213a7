#include "meshtrack/error_score.hpp"

#include <cmath>
#include <stdexcept>

namespace meshtrack {

void ErrorWeights::validate() const {
  if (alpha1 < 0.0 || alpha2 < 0.0 || alpha3 < 0.0)
    throw std::invalid_argument("ErrorWeights: weights must be non-negative");
  if (!(alpha1 + alpha2 + alpha3 > 0.0))
    throw std::invalid_argument("ErrorWeights: weights must have positive sum");
}

bool error_score_in_bounds(const Image& a, const Vec2& x) {
  return x.x >= 1.0 && x.x <= a.width() - 2.0 && x.y >= 1.0 && x.y <= a.height() - 2.0;
}

double error_score(const Image& a, const Image& b, const Vec2& x, const Vec2& w,
                   const ErrorWeights& weights) {
  weights.validate();
  if (!error_score_in_bounds(a, x))
    throw std::invalid_argument("error_score: 3x3 neighbourhood outside image");

  const auto d = [&](int dx, int dy) {
    const double va = a.sample(x.x + dx, x.y + dy);
    const double vb = b.sample(x.x + w.x + dx, x.y + w.y + dy);
    const double diff = va - vb;
    return diff * diff;
  };

  const double center = d(0, 0);
  const double edges = d(-1, 0) + d(1, 0) + d(0, -1) + d(0, 1);
  const double diagonals = d(-1, -1) + d(1, 1) + d(-1, 1) + d(1, -1);
  const double num =
      weights.alpha1 * center + weights.alpha2 * edges + weights.alpha3 * diagonals;
  return std::sqrt(num / (weights.alpha1 + weights.alpha2 + weights.alpha3));
}

}  // namespace meshtrack
