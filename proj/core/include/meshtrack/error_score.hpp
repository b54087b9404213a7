#pragma once

#include "meshtrack/geometry.hpp"
#include "meshtrack/image.hpp"

namespace meshtrack {

// Weights of the 3x3 photometric residual: alpha1 for the centre pixel,
// alpha2 for the four edge neighbours, alpha3 for the four diagonals.
struct ErrorWeights {
  double alpha1 = 1.0;
  double alpha2 = 0.25;
  double alpha3 = 0.125;

  void validate() const;
};

// Weighted RMS photometric error of displacing position x in image a by w
// into image b:
//
//   E(w) = sqrt((a1*d + a2*dc + a3*dd) / (a1 + a2 + a3))
//
// where d is the squared intensity difference at the centre, dc the sum over
// the four edge neighbours and dd over the four diagonals; b is sampled
// bilinearly at x + w + offset (clamped at the borders), a at x + offset.
// x may be sub-pixel. Throws std::invalid_argument when the 3x3
// neighbourhood of x leaves image a.
double error_score(const Image& a, const Image& b, const Vec2& x, const Vec2& w,
                   const ErrorWeights& weights = {});

// True when the 3x3 neighbourhood of x lies inside the image, i.e.
// error_score's precondition holds.
bool error_score_in_bounds(const Image& a, const Vec2& x);

}  // namespace meshtrack
