#pragma once

#include <vector>

#include "meshtrack/geometry.hpp"

namespace meshtrack {

// Dense per-pixel displacement field. Components are stored interleaved as
// float32 (u, v), matching the on-disk .flo layout; arithmetic on sampled
// values is done in double.
class FlowField {
 public:
  FlowField() = default;
  FlowField(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  Vec2 at(int x, int y) const {
    const std::size_t i = 2 * (std::size_t(y) * width_ + x);
    return {uv_[i], uv_[i + 1]};
  }
  void set(int x, int y, const Vec2& w) {
    const std::size_t i = 2 * (std::size_t(y) * width_ + x);
    uv_[i] = float(w.x);
    uv_[i + 1] = float(w.y);
  }

  const std::vector<float>& raw() const { return uv_; }
  std::vector<float>& raw() { return uv_; }

  bool same_size(const FlowField& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

  // Clamped bilinear sample of both components.
  Vec2 sample(double x, double y) const;
  Vec2 sample(const Vec2& p) const { return sample(p.x, p.y); }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> uv_;
};

// Warp-and-add composition: result(x) = w_ab(x) + w_bc(x + w_ab(x)), with
// w_bc sampled bilinearly and clamped at the borders. For spatially constant
// fields this reduces to the plain sum of the two fields.
FlowField compose_flow(const FlowField& w_ab, const FlowField& w_bc);

// Moves a single point through a field: v + w(v), sampled bilinearly.
Vec2 advect_vertex(const Vec2& v, const FlowField& w);

}  // namespace meshtrack
