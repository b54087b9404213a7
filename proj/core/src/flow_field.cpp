#include "meshtrack/flow_field.hpp"

#include <algorithm>
#include <stdexcept>

namespace meshtrack {

FlowField::FlowField(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("FlowField: dimensions must be positive");
  uv_.assign(std::size_t(width) * height * 2, 0.0f);
}

Vec2 FlowField::sample(double x, double y) const {
  x = std::clamp(x, 0.0, double(width_ - 1));
  y = std::clamp(y, 0.0, double(height_ - 1));
  const int x0 = std::min(int(x), std::max(width_ - 2, 0));
  const int y0 = std::min(int(y), std::max(height_ - 2, 0));
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const Vec2 v00 = at(x0, y0);
  const Vec2 v10 = at(x1, y0);
  const Vec2 v01 = at(x0, y1);
  const Vec2 v11 = at(x1, y1);
  return {(1.0 - fy) * ((1.0 - fx) * v00.x + fx * v10.x) + fy * ((1.0 - fx) * v01.x + fx * v11.x),
          (1.0 - fy) * ((1.0 - fx) * v00.y + fx * v10.y) + fy * ((1.0 - fx) * v01.y + fx * v11.y)};
}

FlowField compose_flow(const FlowField& w_ab, const FlowField& w_bc) {
  if (!w_ab.same_size(w_bc))
    throw std::invalid_argument("compose_flow: field dimension mismatch");
  FlowField out(w_ab.width(), w_ab.height());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const Vec2 a = w_ab.at(x, y);
      const Vec2 b = w_bc.sample(x + a.x, y + a.y);
      out.set(x, y, a + b);
    }
  }
  return out;
}

Vec2 advect_vertex(const Vec2& v, const FlowField& w) { return v + w.sample(v); }

}  // namespace meshtrack
