#pragma once

#include <vector>

#include "meshtrack/flow_field.hpp"
#include "meshtrack/image.hpp"

namespace meshtrack {

// Classic brightness-constancy + quadratic-smoothness solver on a
// coarse-to-fine pyramid. Entirely deterministic for fixed parameters; runs
// single-threaded so callers can parallelize across frame pairs.
struct FlowSolverParams {
  int pyramid_levels = 4;
  double pyramid_scale = 0.5;
  int iterations = 100;     // relaxation sweeps per linearization
  int warps = 3;            // relinearizations (warps) per level
  double smoothness = 15.0; // quadratic regularizer weight, [0,1] intensities
  double omega = 1.9;       // SOR relaxation factor in (0, 2); 1 = Gauss-Seidel

  void validate() const;
};

// Energy of the linearized problem after every sweep, one vector per
// (level, warp) linearization. Within a block the energy is non-increasing:
// each sweep is an exact per-pixel minimization of a convex quadratic.
struct FlowEnergyTrace {
  std::vector<std::vector<double>> blocks;
};

FlowField estimate_flow(const Image& a, const Image& b, const FlowSolverParams& params = {},
                        FlowEnergyTrace* trace = nullptr);

// Helpers shared with the synthetic generator and tests.
Image gaussian_blur(const Image& img, double sigma);
Image resize_bilinear(const Image& img, int new_width, int new_height);

}  // namespace meshtrack
