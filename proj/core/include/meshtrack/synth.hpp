#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meshtrack/image.hpp"
#include "meshtrack/mesh.hpp"

namespace meshtrack {

// One deformation mode: a coarse lattice of 2-D displacements interpolated
// with a separable cubic (Catmull-Rom) kernel, scaled over time by
// A * sin(2*pi*cycles*t/return_interval + phase).
struct DeformationMode {
  int grid_cols = 0;
  int grid_rows = 0;
  std::vector<Vec2> grid;  // row-major, displacement pattern in pixels
  double amplitude = 0.0;  // pixels
  double cycles = 1.0;     // per return interval; integers restore identity
  double phase = 0.0;      // radians; zero keeps t=0 at identity
};

// Sum-of-sinusoids deformation over a control lattice. With all phases zero
// the mapping is the identity at t = 0 and again every return_interval
// frames, so near-reference poses exist by construction.
struct DeformationModel {
  int width = 0;   // frame size the model is defined over
  int height = 0;
  int return_interval = 24;
  std::vector<DeformationMode> modes;

  // Displacement at position p, time t (frames).
  Vec2 displacement(const Vec2& p, double t) const;
  // Jacobian of (p + displacement(p, t)) at p, via the analytic kernel
  // derivative. Determinant must stay positive for the warp to stay
  // bijective.
  double jacobian_det(const Vec2& p, double t) const;

  // Forward map p -> p + displacement(p, t).
  Vec2 forward(const Vec2& p, double t) const;
  // Inverse of the forward map by fixed-point iteration; exact to ~1e-9 for
  // fold-over-free models.
  Vec2 inverse(const Vec2& p, double t) const;

  // Random smooth model: `modes_count` modes over a grid_cols x grid_rows
  // lattice, amplitudes decaying per mode, integer cycle counts.
  static DeformationModel random(int width, int height, int return_interval, int modes_count,
                                 double amplitude, int grid_cols, int grid_rows,
                                 std::uint64_t seed);
};

struct DegradationSpec {
  enum class Mode { None, Occlusion, Gaussian, SaltPepper };
  Mode mode = Mode::None;
  // Occlusion: an opaque rectangle riding a circular path.
  int occluder_width = 60;
  int occluder_height = 60;
  double occluder_intensity = 0.2;
  double occluder_orbit_radius_frac = 0.25;  // of min(frame w, h)
  // Additive Gaussian noise, clipped to [0,1].
  double gaussian_sigma = 0.03;
  // Fraction of pixels forced to 0 or 1.
  double sp_density = 0.05;

  void validate() const;

  static Mode parse_mode(const std::string& name);
  static const char* mode_name(Mode mode);
};

// Per-frame ground-truth trajectory of the annotation lattice.
struct GroundTruth {
  std::vector<std::vector<Vec2>> positions;  // [frame][point]
};

struct SequenceArtifacts {
  std::vector<Image> frames;
  GroundTruth ground_truth;
  TriangleMesh mesh;  // triangulated annotation lattice on frame 0
};

// Warps `texture` by the model at each time step (inverse-mapped bilinear
// warp, so rendered motion follows the forward map exactly) and evaluates
// the annotation lattice analytically. Frame 0 is the unwarped texture.
// Throws on fold-over or when the texture is smaller than the model frame.
SequenceArtifacts generate_sequence(const Image& texture, const DeformationModel& model,
                                    int frame_count, int annotation_cols, int annotation_rows,
                                    double margin, int workers);

// Applies the degradation to every frame; deterministic for a fixed seed
// (per-frame RNG streams). Ground truth is untouched by construction.
std::vector<Image> degrade(const std::vector<Image>& frames, const DegradationSpec& spec,
                           std::uint64_t seed, int workers);

// Smooth random test texture: band-passed noise plus blob field, in [0,1].
Image procedural_texture(int width, int height, std::uint64_t seed);

// gt_%04d.csv with header point_id,x,y; positions round-trip exactly.
void write_ground_truth_csv(const std::vector<Vec2>& points, const std::string& path);
std::vector<Vec2> read_ground_truth_csv(const std::string& path);

}  // namespace meshtrack
