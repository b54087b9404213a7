#include "meshtrack/flow_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace meshtrack {

void FlowSolverParams::validate() const {
  if (pyramid_levels < 1) throw std::invalid_argument("flow solver: pyramid_levels must be >= 1");
  if (!(pyramid_scale > 0.0 && pyramid_scale < 1.0))
    throw std::invalid_argument("flow solver: pyramid_scale must be in (0,1)");
  if (iterations < 1) throw std::invalid_argument("flow solver: iterations must be >= 1");
  if (warps < 1) throw std::invalid_argument("flow solver: warps must be >= 1");
  if (!(smoothness > 0.0))
    throw std::invalid_argument("flow solver: smoothness must be positive");
  if (!(omega > 0.0 && omega < 2.0))
    throw std::invalid_argument("flow solver: omega must be in (0,2)");
}

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int w = img.width(), h = img.height();
  Image tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * img.at(std::clamp(x + i, 0, w - 1), y);
      tmp.at(x, y) = float(acc);
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * tmp.at(x, std::clamp(y + i, 0, h - 1));
      out.at(x, y) = float(acc);
    }
  return out;
}

Image resize_bilinear(const Image& img, int new_width, int new_height) {
  Image out(new_width, new_height);
  const double sx = double(img.width()) / new_width;
  const double sy = double(img.height()) / new_height;
  for (int y = 0; y < new_height; ++y)
    for (int x = 0; x < new_width; ++x)
      out.at(x, y) = float(img.sample((x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5));
  return out;
}

namespace {

FlowField resize_flow(const FlowField& f, int new_width, int new_height) {
  FlowField out(new_width, new_height);
  const double sx = double(f.width()) / new_width;
  const double sy = double(f.height()) / new_height;
  const double gain_x = double(new_width) / f.width();
  const double gain_y = double(new_height) / f.height();
  for (int y = 0; y < new_height; ++y)
    for (int x = 0; x < new_width; ++x) {
      const Vec2 w = f.sample((x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
      out.set(x, y, {w.x * gain_x, w.y * gain_y});
    }
  return out;
}

struct Linearization {
  // Per-pixel spatial gradients (average of both frames) and temporal
  // difference at the current warp. Pixels whose warp target left the frame
  // carry zero gradients, leaving only the smoothness term.
  std::vector<double> ix, iy, it;
};

Linearization linearize(const Image& a, const Image& b, const std::vector<double>& u0,
                        const std::vector<double>& v0) {
  const int w = a.width(), h = a.height();
  Linearization lin;
  lin.ix.assign(std::size_t(w) * h, 0.0);
  lin.iy.assign(std::size_t(w) * h, 0.0);
  lin.it.assign(std::size_t(w) * h, 0.0);

  Image bw(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = std::size_t(y) * w + x;
      bw.at(x, y) = float(b.sample(x + u0[i], y + v0[i]));
    }

  const auto dx = [w](const Image& img, int x, int y) {
    const int x0 = std::max(x - 1, 0), x1 = std::min(x + 1, w - 1);
    return (img.at(x1, y) - img.at(x0, y)) / double(x1 - x0);
  };
  const auto dy = [](const Image& img, int x, int y) {
    const int h2 = img.height();
    const int y0 = std::max(y - 1, 0), y1 = std::min(y + 1, h2 - 1);
    return (img.at(x, y1) - img.at(x, y0)) / double(y1 - y0);
  };

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = std::size_t(y) * w + x;
      const double tx = x + u0[i];
      const double ty = y + v0[i];
      if (tx < 0.0 || tx > w - 1 || ty < 0.0 || ty > h - 1) continue;
      lin.ix[i] = 0.5 * (dx(a, x, y) + dx(bw, x, y));
      lin.iy[i] = 0.5 * (dy(a, x, y) + dy(bw, x, y));
      lin.it[i] = double(bw.at(x, y)) - double(a.at(x, y));
    }
  return lin;
}

double linearized_energy(const Linearization& lin, const std::vector<double>& u0,
                         const std::vector<double>& v0, const std::vector<double>& u,
                         const std::vector<double>& v, int w, int h, double alpha) {
  double e = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = std::size_t(y) * w + x;
      const double r = lin.ix[i] * (u[i] - u0[i]) + lin.iy[i] * (v[i] - v0[i]) + lin.it[i];
      e += r * r;
      if (x + 1 < w) {
        const double du = u[i] - u[i + 1], dv = v[i] - v[i + 1];
        e += alpha * (du * du + dv * dv);
      }
      if (y + 1 < h) {
        const double du = u[i] - u[i + w], dv = v[i] - v[i + w];
        e += alpha * (du * du + dv * dv);
      }
    }
  return e;
}

// One raster-order block-SOR sweep. Each pixel's (u,v) block is relaxed
// toward its exact minimizer; for 0 < omega < 2 on this positive-definite
// system the linearized energy cannot increase (Ostrowski-Reich).
void sor_sweep(const Linearization& lin, const std::vector<double>& u0,
               const std::vector<double>& v0, std::vector<double>& u, std::vector<double>& v,
               int w, int h, double alpha, double omega) {
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = std::size_t(y) * w + x;
      double nsum_u = 0.0, nsum_v = 0.0;
      int n = 0;
      if (x > 0) { nsum_u += u[i - 1]; nsum_v += v[i - 1]; ++n; }
      if (x + 1 < w) { nsum_u += u[i + 1]; nsum_v += v[i + 1]; ++n; }
      if (y > 0) { nsum_u += u[i - w]; nsum_v += v[i - w]; ++n; }
      if (y + 1 < h) { nsum_u += u[i + w]; nsum_v += v[i + w]; ++n; }

      const double ix = lin.ix[i], iy = lin.iy[i];
      const double rhs = ix * u0[i] + iy * v0[i] - lin.it[i];
      const double a11 = ix * ix + alpha * n;
      const double a22 = iy * iy + alpha * n;
      const double a12 = ix * iy;
      const double b1 = alpha * nsum_u + ix * rhs;
      const double b2 = alpha * nsum_v + iy * rhs;
      const double det = a11 * a22 - a12 * a12;
      const double u_star = (a22 * b1 - a12 * b2) / det;
      const double v_star = (a11 * b2 - a12 * b1) / det;
      u[i] += omega * (u_star - u[i]);
      v[i] += omega * (v_star - v[i]);
    }
}

}  // namespace

FlowField estimate_flow(const Image& a, const Image& b, const FlowSolverParams& params,
                        FlowEnergyTrace* trace) {
  params.validate();
  if (!a.same_size(b)) throw std::invalid_argument("estimate_flow: image dimension mismatch");

  // Build the pyramid, stopping before any side drops below 8 pixels.
  std::vector<Image> pa{a}, pb{b};
  for (int l = 1; l < params.pyramid_levels; ++l) {
    const int nw = int(std::lround(pa.back().width() * params.pyramid_scale));
    const int nh = int(std::lround(pa.back().height() * params.pyramid_scale));
    if (nw < 8 || nh < 8) break;
    const double sigma = 1.0 / params.pyramid_scale * 0.5;
    pa.push_back(resize_bilinear(gaussian_blur(pa.back(), sigma), nw, nh));
    pb.push_back(resize_bilinear(gaussian_blur(pb.back(), sigma), nw, nh));
  }

  std::vector<double> u, v;
  int prev_w = 0, prev_h = 0;
  for (int l = int(pa.size()) - 1; l >= 0; --l) {
    const int w = pa[l].width(), h = pa[l].height();
    const std::size_t n = std::size_t(w) * h;
    if (u.empty()) {
      u.assign(n, 0.0);
      v.assign(n, 0.0);
    } else {
      FlowField coarse(prev_w, prev_h);
      for (int y = 0; y < prev_h; ++y)
        for (int x = 0; x < prev_w; ++x) {
          const std::size_t i = std::size_t(y) * prev_w + x;
          coarse.set(x, y, {u[i], v[i]});
        }
      const FlowField fine = resize_flow(coarse, w, h);
      u.assign(n, 0.0);
      v.assign(n, 0.0);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const Vec2 f = fine.at(x, y);
          const std::size_t i = std::size_t(y) * w + x;
          u[i] = f.x;
          v[i] = f.y;
        }
    }

    for (int warp = 0; warp < params.warps; ++warp) {
      const std::vector<double> u0 = u, v0 = v;
      const Linearization lin = linearize(pa[l], pb[l], u0, v0);
      std::vector<double>* block = nullptr;
      if (trace) {
        trace->blocks.emplace_back();
        block = &trace->blocks.back();
        block->push_back(linearized_energy(lin, u0, v0, u, v, w, h, params.smoothness));
      }
      for (int it = 0; it < params.iterations; ++it) {
        sor_sweep(lin, u0, v0, u, v, w, h, params.smoothness, params.omega);
        if (block)
          block->push_back(linearized_energy(lin, u0, v0, u, v, w, h, params.smoothness));
      }
    }
    prev_w = w;
    prev_h = h;
  }

  FlowField out(a.width(), a.height());
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      const std::size_t i = std::size_t(y) * a.width() + x;
      out.set(x, y, {u[i], v[i]});
    }
  return out;
}

}  // namespace meshtrack
