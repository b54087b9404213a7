#include "meshtrack/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "meshtrack/errors.hpp"
#include "meshtrack/flow_solver.hpp"

namespace meshtrack {

namespace {

constexpr int kOrientationBins = 36;
constexpr double kOrientationSigmaFactor = 1.5;
constexpr double kOrientationPeakRatio = 0.8;
constexpr int kDescriptorWidth = 4;   // 4x4 spatial bins
constexpr int kDescriptorBins = 8;    // orientation bins per cell
constexpr double kDescriptorScaleFactor = 3.0;
constexpr double kDescriptorMagThreshold = 0.2;
constexpr int kMaxRefineSteps = 5;
constexpr int kDetectionBorder = 4;
constexpr double kTwoPi = 2.0 * M_PI;

struct Candidate {
  int octave;
  double x, y;       // octave coordinates, subpixel
  double interval;   // refined DoG interval
  int layer;         // integer DoG layer it converged on
};

// One octave of the scale space: intervals+3 Gaussian images and
// intervals+2 difference images.
struct Octave {
  std::vector<Image> gauss;
  std::vector<Image> dog;
};

std::vector<Octave> build_scale_space(const Image& img, const DetectorParams& p) {
  const int s = p.intervals;
  const double k = std::pow(2.0, 1.0 / s);

  const double init_extra =
      std::sqrt(std::max(p.sigma * p.sigma - p.assumed_blur * p.assumed_blur, 0.01));
  Image base = gaussian_blur(img, init_extra);

  int n_octaves = 1;
  for (int dim = std::min(img.width(), img.height()) / 2; dim >= 16 && n_octaves < p.max_octaves;
       dim /= 2)
    ++n_octaves;

  std::vector<double> sig_inc(s + 3, 0.0);
  for (int i = 1; i < s + 3; ++i) {
    const double prev = p.sigma * std::pow(k, i - 1);
    sig_inc[i] = prev * std::sqrt(k * k - 1.0);
  }

  std::vector<Octave> octaves(n_octaves);
  for (int o = 0; o < n_octaves; ++o) {
    auto& oct = octaves[o];
    oct.gauss.reserve(s + 3);
    if (o == 0) {
      oct.gauss.push_back(std::move(base));
    } else {
      // Downsample the image that sits exactly one doubling up (index s).
      const Image& src = octaves[o - 1].gauss[s];
      Image down(src.width() / 2, src.height() / 2);
      for (int y = 0; y < down.height(); ++y)
        for (int x = 0; x < down.width(); ++x) down.at(x, y) = src.at(2 * x, 2 * y);
      oct.gauss.push_back(std::move(down));
    }
    for (int i = 1; i < s + 3; ++i)
      oct.gauss.push_back(gaussian_blur(oct.gauss[i - 1], sig_inc[i]));

    oct.dog.reserve(s + 2);
    for (int i = 0; i < s + 2; ++i) {
      const Image& a = oct.gauss[i];
      const Image& b = oct.gauss[i + 1];
      Image d(a.width(), a.height());
      for (std::size_t j = 0; j < d.data().size(); ++j)
        d.data()[j] = b.data()[j] - a.data()[j];
      oct.dog.push_back(std::move(d));
    }
  }
  return octaves;
}

bool is_extremum(const std::vector<Image>& dog, int layer, int x, int y) {
  const float v = dog[layer].at(x, y);
  if (v > 0) {
    for (int l = layer - 1; l <= layer + 1; ++l)
      for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i) {
          if (l == layer && i == 0 && j == 0) continue;
          if (dog[l].at(x + i, y + j) >= v) return false;
        }
  } else {
    for (int l = layer - 1; l <= layer + 1; ++l)
      for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i) {
          if (l == layer && i == 0 && j == 0) continue;
          if (dog[l].at(x + i, y + j) <= v) return false;
        }
  }
  return true;
}

// Quadratic refinement of an extremum in (x, y, scale); rejects low-contrast
// and edge-like responses. Follows the usual 3x3 Hessian solve.
bool refine_candidate(const std::vector<Image>& dog, const DetectorParams& p, int octave, int x,
                      int y, int layer, Candidate& out) {
  const int s = p.intervals;
  double dx = 0, dy = 0, ds = 0;
  double off_x = 0, off_y = 0, off_s = 0;
  for (int step = 0; step < kMaxRefineSteps; ++step) {
    const Image& d0 = dog[layer - 1];
    const Image& d1 = dog[layer];
    const Image& d2 = dog[layer + 1];

    dx = 0.5 * (d1.at(x + 1, y) - d1.at(x - 1, y));
    dy = 0.5 * (d1.at(x, y + 1) - d1.at(x, y - 1));
    ds = 0.5 * (d2.at(x, y) - d0.at(x, y));

    const double dxx = d1.at(x + 1, y) + d1.at(x - 1, y) - 2.0 * d1.at(x, y);
    const double dyy = d1.at(x, y + 1) + d1.at(x, y - 1) - 2.0 * d1.at(x, y);
    const double dss = d2.at(x, y) + d0.at(x, y) - 2.0 * d1.at(x, y);
    const double dxy = 0.25 * (d1.at(x + 1, y + 1) - d1.at(x - 1, y + 1) -
                               d1.at(x + 1, y - 1) + d1.at(x - 1, y - 1));
    const double dxs = 0.25 * (d2.at(x + 1, y) - d2.at(x - 1, y) -
                               d0.at(x + 1, y) + d0.at(x - 1, y));
    const double dys = 0.25 * (d2.at(x, y + 1) - d2.at(x, y - 1) -
                               d0.at(x, y + 1) + d0.at(x, y - 1));

    // Solve H * offset = -g by Cramer's rule.
    const double det = dxx * (dyy * dss - dys * dys) - dxy * (dxy * dss - dys * dxs) +
                       dxs * (dxy * dys - dyy * dxs);
    if (std::abs(det) < 1e-30) return false;
    const double inv = 1.0 / det;
    off_x = -inv * (dx * (dyy * dss - dys * dys) - dxy * (dy * dss - dys * ds) +
                    dxs * (dy * dys - dyy * ds));
    off_y = -inv * (dxx * (dy * dss - ds * dys) - dx * (dxy * dss - dys * dxs) +
                    dxs * (dxy * ds - dy * dxs));
    off_s = -inv * (dxx * (dyy * ds - dy * dys) - dxy * (dxy * ds - dy * dxs) +
                    dx * (dxy * dys - dyy * dxs));

    if (std::abs(off_x) < 0.5 && std::abs(off_y) < 0.5 && std::abs(off_s) < 0.5) break;
    if (step + 1 == kMaxRefineSteps) return false;

    x += int(std::lround(off_x));
    y += int(std::lround(off_y));
    layer += int(std::lround(off_s));
    const Image& d = dog[std::clamp(layer, 1, s)];
    if (layer < 1 || layer > s || x < kDetectionBorder || x >= d.width() - kDetectionBorder ||
        y < kDetectionBorder || y >= d.height() - kDetectionBorder)
      return false;
  }

  const Image& d1 = dog[layer];
  const double contrast = d1.at(x, y) + 0.5 * (dx * off_x + dy * off_y + ds * off_s);
  if (std::abs(contrast) < p.contrast_threshold / s) return false;

  const double dxx = d1.at(x + 1, y) + d1.at(x - 1, y) - 2.0 * d1.at(x, y);
  const double dyy = d1.at(x, y + 1) + d1.at(x, y - 1) - 2.0 * d1.at(x, y);
  const double dxy = 0.25 * (d1.at(x + 1, y + 1) - d1.at(x - 1, y + 1) - d1.at(x + 1, y - 1) +
                             d1.at(x - 1, y - 1));
  const double tr = dxx + dyy;
  const double det2 = dxx * dyy - dxy * dxy;
  const double r = p.edge_threshold;
  if (det2 <= 0.0 || tr * tr * r >= (r + 1.0) * (r + 1.0) * det2) return false;

  out.octave = octave;
  out.x = x + off_x;
  out.y = y + off_y;
  out.interval = layer + off_s;
  out.layer = layer;
  return true;
}

// 36-bin gradient orientation histogram around (x, y); returns the dominant
// directions (up to max_orientations), strongest first.
std::vector<double> dominant_orientations(const Image& gauss, int x, int y, double sigma_rel,
                                          int max_orientations) {
  const double sigma = kOrientationSigmaFactor * sigma_rel;
  const int radius = int(std::lround(3.0 * sigma));
  const double denom = 2.0 * sigma * sigma;
  double hist[kOrientationBins] = {0};

  for (int j = -radius; j <= radius; ++j) {
    const int yy = y + j;
    if (yy < 1 || yy >= gauss.height() - 1) continue;
    for (int i = -radius; i <= radius; ++i) {
      const int xx = x + i;
      if (xx < 1 || xx >= gauss.width() - 1) continue;
      const double gx = gauss.at(xx + 1, yy) - gauss.at(xx - 1, yy);
      const double gy = gauss.at(xx, yy + 1) - gauss.at(xx, yy - 1);
      const double mag = std::sqrt(gx * gx + gy * gy);
      const double weight = std::exp(-(i * i + j * j) / denom);
      double angle = std::atan2(gy, gx);
      if (angle < 0) angle += kTwoPi;
      int bin = int(angle / kTwoPi * kOrientationBins) % kOrientationBins;
      hist[bin] += weight * mag;
    }
  }

  // Two circular (1,2,1)/4 smoothing passes.
  for (int pass = 0; pass < 2; ++pass) {
    double tmp[kOrientationBins];
    for (int b = 0; b < kOrientationBins; ++b) {
      const double l = hist[(b + kOrientationBins - 1) % kOrientationBins];
      const double r = hist[(b + 1) % kOrientationBins];
      tmp[b] = 0.25 * l + 0.5 * hist[b] + 0.25 * r;
    }
    std::memcpy(hist, tmp, sizeof(hist));
  }

  double peak = 0.0;
  for (double v : hist) peak = std::max(peak, v);
  if (peak <= 0.0) return {};

  std::vector<std::pair<double, double>> found;  // (value, angle)
  for (int b = 0; b < kOrientationBins; ++b) {
    const double l = hist[(b + kOrientationBins - 1) % kOrientationBins];
    const double r = hist[(b + 1) % kOrientationBins];
    if (hist[b] > l && hist[b] > r && hist[b] >= kOrientationPeakRatio * peak) {
      const double offset = 0.5 * (l - r) / (l - 2.0 * hist[b] + r);
      double angle = (b + 0.5 + offset) * kTwoPi / kOrientationBins;
      if (angle < 0) angle += kTwoPi;
      if (angle >= kTwoPi) angle -= kTwoPi;
      found.emplace_back(hist[b], angle);
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<double> out;
  for (std::size_t i = 0; i < found.size() && int(i) < max_orientations; ++i)
    out.push_back(found[i].second);
  return out;
}

// 4x4x8 gradient histogram descriptor with trilinear binning, rotated to the
// feature orientation; normalized, clipped at 0.2, renormalized.
std::array<float, kDescriptorSize> build_descriptor(const Image& gauss, double fx, double fy,
                                                    double orientation, double sigma_rel) {
  const int d = kDescriptorWidth;
  const int nbins = kDescriptorBins;
  const double hist_width = kDescriptorScaleFactor * sigma_rel;
  const double cos_t = std::cos(orientation) / hist_width;
  const double sin_t = std::sin(orientation) / hist_width;
  const double bins_per_rad = nbins / kTwoPi;
  const double exp_denom = 0.5 * d * d;
  int radius = int(std::lround(hist_width * std::sqrt(2.0) * (d + 1) * 0.5 + 0.5));
  radius = std::min(radius, int(std::hypot(gauss.width(), gauss.height())));

  const int x = int(std::lround(fx));
  const int y = int(std::lround(fy));

  // (d+2)^2 spatial cells x (nbins+1) wrap slot, trimmed at the end.
  std::vector<double> hist((d + 2) * (d + 2) * (nbins + 1), 0.0);
  const auto slot = [&](int r, int c, int o) {
    return (std::size_t(r) * (d + 2) + c) * (nbins + 1) + o;
  };

  for (int j = -radius; j <= radius; ++j) {
    for (int i = -radius; i <= radius; ++i) {
      const double c_rot = i * cos_t - j * sin_t;
      const double r_rot = i * sin_t + j * cos_t;
      const double rbin = r_rot + d / 2 - 0.5;
      const double cbin = c_rot + d / 2 - 0.5;
      if (rbin <= -1.0 || rbin >= d || cbin <= -1.0 || cbin >= d) continue;
      const int xx = x + i, yy = y + j;
      if (xx < 1 || xx >= gauss.width() - 1 || yy < 1 || yy >= gauss.height() - 1) continue;

      const double gx = gauss.at(xx + 1, yy) - gauss.at(xx - 1, yy);
      const double gy = gauss.at(xx, yy + 1) - gauss.at(xx, yy - 1);
      double angle = std::atan2(gy, gx) - orientation;
      while (angle < 0) angle += kTwoPi;
      while (angle >= kTwoPi) angle -= kTwoPi;
      const double obin = angle * bins_per_rad;
      const double mag = std::sqrt(gx * gx + gy * gy) *
                         std::exp(-(c_rot * c_rot + r_rot * r_rot) / exp_denom);

      const int r0 = int(std::floor(rbin));
      const int c0 = int(std::floor(cbin));
      const int o0 = int(std::floor(obin));
      const double dr = rbin - r0, dc = cbin - c0, dob = obin - o0;

      for (int ri = 0; ri <= 1; ++ri) {
        const int rr = r0 + ri + 1;
        if (rr < 0 || rr >= d + 2) continue;
        const double wr = mag * (ri == 0 ? 1.0 - dr : dr);
        for (int ci = 0; ci <= 1; ++ci) {
          const int cc = c0 + ci + 1;
          if (cc < 0 || cc >= d + 2) continue;
          const double wc = wr * (ci == 0 ? 1.0 - dc : dc);
          for (int oi = 0; oi <= 1; ++oi) {
            const int oo = (o0 + oi) % nbins;
            hist[slot(rr, cc, oo)] += wc * (oi == 0 ? 1.0 - dob : dob);
          }
        }
      }
    }
  }

  std::array<float, kDescriptorSize> desc{};
  int idx = 0;
  for (int r = 1; r <= d; ++r)
    for (int c = 1; c <= d; ++c)
      for (int o = 0; o < nbins; ++o) desc[idx++] = float(hist[slot(r, c, o)]);

  double norm2 = 0.0;
  for (float v : desc) norm2 += double(v) * v;
  double norm = std::sqrt(norm2);
  if (norm > 0) {
    for (float& v : desc) v = float(std::min(double(v) / norm, kDescriptorMagThreshold));
    norm2 = 0.0;
    for (float v : desc) norm2 += double(v) * v;
    norm = std::sqrt(norm2);
    if (norm > 0)
      for (float& v : desc) v = float(v / norm);
  }
  return desc;
}

}  // namespace

std::vector<Feature> detect_features(const Image& img, const DetectorParams& params) {
  if (img.width() < 16 || img.height() < 16)
    throw std::invalid_argument("detect_features: image smaller than 16x16");

  const int s = params.intervals;
  const double k = std::pow(2.0, 1.0 / s);
  const std::vector<Octave> octaves = build_scale_space(img, params);
  const double prelim = 0.5 * params.contrast_threshold / s;

  std::vector<Feature> features;
  for (int o = 0; o < int(octaves.size()); ++o) {
    const auto& dog = octaves[o].dog;
    const int w = dog[0].width(), h = dog[0].height();
    for (int layer = 1; layer <= s; ++layer) {
      for (int y = kDetectionBorder; y < h - kDetectionBorder; ++y) {
        for (int x = kDetectionBorder; x < w - kDetectionBorder; ++x) {
          if (std::abs(dog[layer].at(x, y)) <= prelim) continue;
          if (!is_extremum(dog, layer, x, y)) continue;
          Candidate cand;
          if (!refine_candidate(dog, params, o, x, y, layer, cand)) continue;

          const double sigma_rel = params.sigma * std::pow(k, cand.interval);
          const double octave_scale = double(1 << o);
          const Image& gauss = octaves[o].gauss[cand.layer];
          const int gx = int(std::lround(cand.x));
          const int gy = int(std::lround(cand.y));
          const auto orientations =
              dominant_orientations(gauss, gx, gy, sigma_rel, params.max_orientations);
          for (double angle : orientations) {
            Feature f;
            f.position = {cand.x * octave_scale, cand.y * octave_scale};
            f.scale = sigma_rel * octave_scale;
            f.orientation = angle;
            f.descriptor = build_descriptor(gauss, cand.x, cand.y, angle, sigma_rel);
            features.push_back(std::move(f));
          }
        }
      }
    }
  }

  std::sort(features.begin(), features.end(), [](const Feature& a, const Feature& b) {
    if (a.position.y != b.position.y) return a.position.y < b.position.y;
    if (a.position.x != b.position.x) return a.position.x < b.position.x;
    if (a.scale != b.scale) return a.scale < b.scale;
    return a.orientation < b.orientation;
  });
  return features;
}

void write_feature_cache(const std::vector<Feature>& features, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write feature cache: " + path);
  const std::uint32_t count = std::uint32_t(features.size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (const Feature& f : features) {
    const float head[4] = {float(f.position.x), float(f.position.y), float(f.scale),
                           float(f.orientation)};
    out.write(reinterpret_cast<const char*>(head), sizeof(head));
    out.write(reinterpret_cast<const char*>(f.descriptor.data()),
              kDescriptorSize * sizeof(float));
  }
}

std::vector<Feature> read_feature_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open feature cache: " + path);
  std::uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in || count > (1u << 24)) throw InputError("malformed feature cache: " + path);
  std::vector<Feature> features(count);
  for (auto& f : features) {
    float head[4];
    in.read(reinterpret_cast<char*>(head), sizeof(head));
    in.read(reinterpret_cast<char*>(f.descriptor.data()), kDescriptorSize * sizeof(float));
    f.position = {head[0], head[1]};
    f.scale = head[2];
    f.orientation = head[3];
  }
  if (!in) throw InputError("truncated feature cache: " + path);
  return features;
}

}  // namespace meshtrack
