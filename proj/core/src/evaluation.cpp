#include "meshtrack/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "meshtrack/errors.hpp"
#include "meshtrack/image_io.hpp"

namespace meshtrack {

EvaluationReport evaluate_run(const std::vector<std::vector<Vec2>>& tracked,
                              const std::vector<std::vector<Vec2>>& ground_truth,
                              const EvaluationOptions& options) {
  if (tracked.size() != ground_truth.size())
    throw InputError("evaluate_run: tracked and ground truth cover different frame counts");
  if (tracked.empty()) throw InputError("evaluate_run: no frames to evaluate");

  EvaluationReport report;
  report.first_k = options.first_k;
  report.per_frame_mean.reserve(tracked.size());
  for (std::size_t f = 0; f < tracked.size(); ++f) {
    const std::size_t n = std::min(tracked[f].size(), ground_truth[f].size());
    if (n == 0)
      throw InputError("evaluate_run: frame " + std::to_string(f) + " has no common points");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sum += endpoint_error(tracked[f][i], ground_truth[f][i]);
    report.per_frame_mean.push_back(sum / double(n));
  }

  double total = 0.0;
  for (double v : report.per_frame_mean) total += v;
  report.aee = total / double(report.per_frame_mean.size());

  const std::size_t k = std::min<std::size_t>(options.first_k, report.per_frame_mean.size());
  double head = 0.0;
  for (std::size_t f = 0; f < k; ++f) head += report.per_frame_mean[f];
  report.aee_first_k = k > 0 ? head / double(k) : 0.0;
  return report;
}

void write_report_csv(const EvaluationReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write report csv: " + path);
  out << "frame,mean_ee\n";
  char buf[64];
  for (std::size_t f = 0; f < report.per_frame_mean.size(); ++f) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", f, report.per_frame_mean[f]);
    out << buf;
  }
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write summary csv: " + path);
  out << "method,sequence,AEE,AEE_first30\n";
  char buf[64];
  for (const SummaryRow& r : rows) {
    std::snprintf(buf, sizeof(buf), ",%.9g,%.9g\n", r.aee, r.aee_first_k);
    out << r.method << "," << r.sequence << buf;
  }
}

namespace {

void draw_line(Image& r, Image& g, Image& b, Vec2 p0, Vec2 p1) {
  // Bresenham on rounded endpoints; marks the red plane, clears the others.
  int x0 = int(std::lround(p0.x)), y0 = int(std::lround(p0.y));
  int x1 = int(std::lround(p1.x)), y1 = int(std::lround(p1.y));
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (x0 >= 0 && x0 < r.width() && y0 >= 0 && y0 < r.height()) {
      r.at(x0, y0) = 1.0f;
      g.at(x0, y0) = 0.1f;
      b.at(x0, y0) = 0.1f;
    }
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

void render_overlay(const Image& frame, const TriangleMesh& mesh, const std::string& path) {
  Image r = frame, g = frame, b = frame;
  for (const auto& e : mesh.edges)
    draw_line(r, g, b, mesh.vertices[e[0]], mesh.vertices[e[1]]);
  save_png_rgb(r, g, b, path);
}

}  // namespace meshtrack
