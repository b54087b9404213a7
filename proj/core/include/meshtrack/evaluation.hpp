#pragma once

#include <string>
#include <vector>

#include "meshtrack/geometry.hpp"
#include "meshtrack/image.hpp"
#include "meshtrack/mesh.hpp"

namespace meshtrack {

inline double endpoint_error(const Vec2& tracked, const Vec2& gt) {
  return distance(tracked, gt);
}

struct EvaluationReport {
  std::vector<double> per_frame_mean;  // mean endpoint error per frame, px
  double aee = 0.0;                    // mean of the per-frame means
  double aee_first_k = 0.0;            // same over the first K frames
  int first_k = 30;
};

struct EvaluationOptions {
  int first_k = 30;
};

// Per-frame mean endpoint error and the sequence AEE. Both inputs are
// [frame][point]; frames must match one-to-one, points are matched by index.
// A frame may carry fewer ground-truth points than tracked points (the extra
// tracked points are skipped), but at least one common point per frame is
// required.
EvaluationReport evaluate_run(const std::vector<std::vector<Vec2>>& tracked,
                              const std::vector<std::vector<Vec2>>& ground_truth,
                              const EvaluationOptions& options = {});

// report CSV: frame,mean_ee
void write_report_csv(const EvaluationReport& report, const std::string& path);

// summary CSV with one row per evaluated run: method,sequence,AEE,AEE_first30
struct SummaryRow {
  std::string method;
  std::string sequence;
  double aee = 0.0;
  double aee_first_k = 0.0;
};
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

// Frame with the mesh wireframe drawn on top (red lines over the grayscale
// image), for overlay_%04d.png outputs.
void render_overlay(const Image& frame, const TriangleMesh& mesh, const std::string& path);

}  // namespace meshtrack
