#include "meshtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "meshtrack/errors.hpp"
#include "meshtrack/flow_solver.hpp"
#include "meshtrack/parallel.hpp"
#include "meshtrack/rng.hpp"

namespace meshtrack {

namespace {

// Catmull-Rom kernel and its derivative.
double cubic_kernel(double t) {
  t = std::abs(t);
  if (t < 1.0) return ((1.5 * t - 2.5) * t) * t + 1.0;
  if (t < 2.0) return (((-0.5 * t + 2.5) * t) - 4.0) * t + 2.0;
  return 0.0;
}

double cubic_kernel_deriv(double t) {
  const double s = t < 0 ? -1.0 : 1.0;
  t = std::abs(t);
  if (t < 1.0) return s * ((4.5 * t - 5.0) * t);
  if (t < 2.0) return s * ((-1.5 * t + 5.0) * t - 4.0);
  return 0.0;
}

struct ModeSample {
  Vec2 value;
  Vec2 ddx;  // derivative of (value.x, value.y) w.r.t. x
  Vec2 ddy;
};

ModeSample sample_mode(const DeformationMode& mode, int width, int height, const Vec2& p) {
  const double sx = double(mode.grid_cols - 1) / (width - 1);
  const double sy = double(mode.grid_rows - 1) / (height - 1);
  const double gx = p.x * sx;
  const double gy = p.y * sy;
  const int ix = int(std::floor(gx));
  const int iy = int(std::floor(gy));

  ModeSample out;
  for (int j = -1; j <= 2; ++j) {
    const int ry = std::clamp(iy + j, 0, mode.grid_rows - 1);
    const double wy = cubic_kernel(gy - (iy + j));
    const double dwy = cubic_kernel_deriv(gy - (iy + j)) * sy;
    for (int i = -1; i <= 2; ++i) {
      const int rx = std::clamp(ix + i, 0, mode.grid_cols - 1);
      const double wx = cubic_kernel(gx - (ix + i));
      const double dwx = cubic_kernel_deriv(gx - (ix + i)) * sx;
      const Vec2& g = mode.grid[std::size_t(ry) * mode.grid_cols + rx];
      out.value += g * (wx * wy);
      out.ddx += g * (dwx * wy);
      out.ddy += g * (wx * dwy);
    }
  }
  return out;
}

double mode_gain(const DeformationMode& mode, double t, int return_interval) {
  return mode.amplitude *
         std::sin(2.0 * M_PI * mode.cycles * t / return_interval + mode.phase);
}

}  // namespace

Vec2 DeformationModel::displacement(const Vec2& p, double t) const {
  Vec2 d;
  for (const DeformationMode& mode : modes)
    d += sample_mode(mode, width, height, p).value * mode_gain(mode, t, return_interval);
  return d;
}

double DeformationModel::jacobian_det(const Vec2& p, double t) const {
  double j11 = 1.0, j12 = 0.0, j21 = 0.0, j22 = 1.0;
  for (const DeformationMode& mode : modes) {
    const double a = mode_gain(mode, t, return_interval);
    const ModeSample s = sample_mode(mode, width, height, p);
    j11 += a * s.ddx.x;
    j12 += a * s.ddy.x;
    j21 += a * s.ddx.y;
    j22 += a * s.ddy.y;
  }
  return j11 * j22 - j12 * j21;
}

Vec2 DeformationModel::forward(const Vec2& p, double t) const {
  return p + displacement(p, t);
}

Vec2 DeformationModel::inverse(const Vec2& p, double t) const {
  Vec2 q = p;
  for (int it = 0; it < 50; ++it) {
    const Vec2 next = p - displacement(q, t);
    const double delta = (next - q).norm2();
    q = next;
    if (delta < 1e-20) break;
  }
  return q;
}

DeformationModel DeformationModel::random(int width, int height, int return_interval,
                                          int modes_count, double amplitude, int grid_cols,
                                          int grid_rows, std::uint64_t seed) {
  if (width < 8 || height < 8)
    throw std::invalid_argument("DeformationModel: frame too small");
  if (grid_cols < 2 || grid_rows < 2)
    throw std::invalid_argument("DeformationModel: control grid must be at least 2x2");
  if (return_interval < 2)
    throw std::invalid_argument("DeformationModel: return interval must be >= 2 frames");

  DeformationModel model;
  model.width = width;
  model.height = height;
  model.return_interval = return_interval;
  Rng rng = Rng(seed).fork(0x6d6f64656cULL);
  for (int m = 0; m < modes_count; ++m) {
    DeformationMode mode;
    mode.grid_cols = grid_cols;
    mode.grid_rows = grid_rows;
    mode.amplitude = amplitude / (m + 1);
    mode.cycles = m + 1;  // integer cycles: exact identity at every return
    mode.phase = 0.0;
    mode.grid.resize(std::size_t(grid_cols) * grid_rows);
    for (Vec2& g : mode.grid) {
      // Unit-disc direction per node.
      double x, y;
      do {
        x = rng.uniform(-1.0, 1.0);
        y = rng.uniform(-1.0, 1.0);
      } while (x * x + y * y > 1.0);
      g = {x, y};
    }
    model.modes.push_back(std::move(mode));
  }
  return model;
}

void DegradationSpec::validate() const {
  if (occluder_width < 0 || occluder_height < 0 || occluder_orbit_radius_frac < 0)
    throw std::invalid_argument("DegradationSpec: occluder parameters must be non-negative");
  if (gaussian_sigma < 0) throw std::invalid_argument("DegradationSpec: sigma must be >= 0");
  if (sp_density < 0.0 || sp_density > 1.0)
    throw std::invalid_argument("DegradationSpec: sp_density must be in [0,1]");
}

DegradationSpec::Mode DegradationSpec::parse_mode(const std::string& name) {
  if (name == "none") return Mode::None;
  if (name == "occlusion") return Mode::Occlusion;
  if (name == "gaussian") return Mode::Gaussian;
  if (name == "salt_pepper") return Mode::SaltPepper;
  throw InputError("unknown degradation mode: " + name);
}

const char* DegradationSpec::mode_name(Mode mode) {
  switch (mode) {
    case Mode::None: return "none";
    case Mode::Occlusion: return "occlusion";
    case Mode::Gaussian: return "gaussian";
    case Mode::SaltPepper: return "salt_pepper";
  }
  return "unknown";
}

SequenceArtifacts generate_sequence(const Image& texture, const DeformationModel& model,
                                    int frame_count, int annotation_cols, int annotation_rows,
                                    double margin, int workers) {
  if (frame_count < 2) throw std::invalid_argument("generate_sequence: need >= 2 frames");
  if (texture.width() < model.width || texture.height() < model.height)
    throw std::invalid_argument("generate_sequence: texture too small for model frame");
  if (annotation_cols < 2 || annotation_rows < 2)
    throw std::invalid_argument("generate_sequence: need at least a 2x2 annotation lattice");

  const int w = model.width, h = model.height;

  // The model must be the identity at t = 0.
  for (int y = 0; y < h; y += std::max(1, h / 8))
    for (int x = 0; x < w; x += std::max(1, w / 8))
      if (model.displacement({double(x), double(y)}, 0.0).norm() > 1e-9)
        throw std::invalid_argument("generate_sequence: model is not identity at t=0");

  SequenceArtifacts out;
  out.mesh = lattice_mesh(margin, margin, w - 1 - margin, h - 1 - margin, annotation_cols,
                          annotation_rows);
  out.frames.assign(frame_count, Image());
  out.ground_truth.positions.assign(frame_count, {});

  // Frame 0 is the unwarped texture, cropped to the model frame.
  Image frame0(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) frame0.at(x, y) = texture.at(x, y);
  out.frames[0] = std::move(frame0);
  out.ground_truth.positions[0] = out.mesh.vertices;

  std::vector<std::string> errors(frame_count);
  parallel_for(std::size_t(frame_count - 1), workers, [&](std::size_t k) {
    const int t = int(k) + 1;
    // Fold-over check on a coarse grid before rendering.
    for (int y = 0; y < h; y += 4)
      for (int x = 0; x < w; x += 4)
        if (model.jacobian_det({double(x), double(y)}, t) <= 0.0) {
          errors[t] = "fold-over detected at frame " + std::to_string(t);
          return;
        }

    Image frame(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const Vec2 q = model.inverse({double(x), double(y)}, t);
        frame.at(x, y) = float(texture.sample(q));
      }
    out.frames[t] = std::move(frame);

    std::vector<Vec2> gt(out.mesh.vertices.size());
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = model.forward(out.mesh.vertices[i], t);
    out.ground_truth.positions[t] = std::move(gt);
  });
  for (const std::string& e : errors)
    if (!e.empty()) throw std::runtime_error("generate_sequence: " + e);

  return out;
}

std::vector<Image> degrade(const std::vector<Image>& frames, const DegradationSpec& spec,
                           std::uint64_t seed, int workers) {
  spec.validate();
  std::vector<Image> out(frames.size());
  const int total = int(frames.size());
  parallel_for(frames.size(), workers, [&](std::size_t t) {
    Image img = frames[t];
    const int w = img.width(), h = img.height();
    Rng rng = Rng(seed).fork(t);
    switch (spec.mode) {
      case DegradationSpec::Mode::None:
        break;
      case DegradationSpec::Mode::Occlusion: {
        const double orbit = spec.occluder_orbit_radius_frac * std::min(w, h);
        const double angle = 2.0 * M_PI * double(t) / std::max(total, 1);
        const int cx = int(std::lround(0.5 * (w - 1) + orbit * std::cos(angle)));
        const int cy = int(std::lround(0.5 * (h - 1) + orbit * std::sin(angle)));
        const int x0 = std::clamp(cx - spec.occluder_width / 2, 0, w);
        const int y0 = std::clamp(cy - spec.occluder_height / 2, 0, h);
        const int x1 = std::clamp(x0 + spec.occluder_width, 0, w);
        const int y1 = std::clamp(y0 + spec.occluder_height, 0, h);
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) img.at(x, y) = float(spec.occluder_intensity);
        break;
      }
      case DegradationSpec::Mode::Gaussian:
        for (float& v : img.data())
          v = float(std::clamp(double(v) + spec.gaussian_sigma * rng.gaussian(), 0.0, 1.0));
        break;
      case DegradationSpec::Mode::SaltPepper:
        for (float& v : img.data()) {
          const double u = rng.uniform();
          if (u < 0.5 * spec.sp_density)
            v = 0.0f;
          else if (u < spec.sp_density)
            v = 1.0f;
        }
        break;
    }
    out[t] = std::move(img);
  });
  return out;
}

Image procedural_texture(int width, int height, std::uint64_t seed) {
  Rng rng = Rng(seed).fork(0x74657874ULL);

  // Band-passed noise: structure at the scales the detector responds to.
  Image noise(width, height);
  for (float& v : noise.data()) v = float(rng.uniform());
  const Image fine = gaussian_blur(noise, 0.8);
  const Image coarse = gaussian_blur(noise, 2.4);

  // Dense random blob field for larger-scale structure.
  Image img(width, height, 0.5f);
  const int blobs = std::max(60, width * height / 160);
  for (int b = 0; b < blobs; ++b) {
    const double cx = rng.uniform(0.0, width - 1.0);
    const double cy = rng.uniform(0.0, height - 1.0);
    const double sigma = rng.uniform(1.2, 7.0);
    const double amp = rng.uniform(-0.6, 0.6);
    const int r = int(std::ceil(3.0 * sigma));
    const int x0 = std::max(0, int(cx) - r), x1 = std::min(width - 1, int(cx) + r);
    const int y0 = std::max(0, int(cy) - r), y1 = std::min(height - 1, int(cy) + r);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        img.at(x, y) += float(amp * std::exp(-0.5 * d2 / (sigma * sigma)));
      }
  }
  for (std::size_t i = 0; i < img.data().size(); ++i)
    img.data()[i] += 1.6f * (fine.data()[i] - coarse.data()[i]);

  // Normalize into [0.04, 0.96] to keep headroom for additive noise.
  float lo = img.data()[0], hi = img.data()[0];
  for (float v : img.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const float span = hi > lo ? hi - lo : 1.0f;
  for (float& v : img.data()) v = 0.04f + 0.92f * (v - lo) / span;
  return img;
}

void write_ground_truth_csv(const std::vector<Vec2>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write ground truth csv: " + path);
  out << "point_id,x,y\n";
  char buf[96];
  for (int i = 0; i < int(points.size()); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", i, points[i].x, points[i].y);
    out << buf;
  }
}

std::vector<Vec2> read_ground_truth_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open ground truth csv: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("point_id", 0) != 0)
    throw InputError("malformed ground truth csv (missing header): " + path);
  std::vector<Vec2> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int id = 0;
    double x = 0, y = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf", &id, &x, &y) != 3)
      throw InputError("malformed ground truth row: " + path);
    if (id != int(points.size()))
      throw InputError("non-contiguous point ids in: " + path);
    points.push_back({x, y});
  }
  return points;
}

}  // namespace meshtrack
