#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "meshtrack/anchors.hpp"
#include "meshtrack/error_score.hpp"
#include "meshtrack/features.hpp"
#include "meshtrack/flow_solver.hpp"
#include "meshtrack/patches.hpp"
#include "meshtrack/synth.hpp"

namespace meshtrack {

// Simple "key = value" text files; '#' starts a comment. Used for configs
// and for the manifests written next to every output.
using KeyValueList = std::vector<std::pair<std::string, std::string>>;

KeyValueList read_key_value_file(const std::string& path);
void write_key_value_file(const KeyValueList& entries, const std::string& path);

// Every tunable of the tracking pipeline. Serialized in full into each
// output manifest so any run can be reproduced from its outputs.
struct PipelineConfig {
  // mode: baseline (flow chain only), anchor-frames, apo (full)
  std::string mode = "apo";
  bool no_anchor_frames = false;  // ablation switch on top of mode apo
  bool no_patches = false;
  double feature_fraction = 1.0;  // fraction of features kept for patch labeling

  FlowSolverParams solver;
  DetectorParams detector;
  double match_ratio = 0.8;
  double tau = 30.0;
  ErrorWeights weights;
  double eta = 0.08;
  bool eta_auto = false;  // 2x median match error score instead of fixed eta
  double patch_search_radius = 5.0;
  double patch_max_search_radius = 40.0;
  AnchorPolicy anchor_policy;

  int workers = 0;  // 0 = all hardware threads
  std::uint64_t seed = 1;
  std::string cache_dir;          // .flo flow cache
  std::string feature_cache_dir;  // per-frame binary feature cache

  void validate() const;
  void set(const std::string& key, const std::string& value);
  void apply(const KeyValueList& entries);
  KeyValueList to_key_values() const;
};

// Tunables of the synthetic benchmark generator.
struct GeneratorConfig {
  int width = 500;
  int height = 500;
  int frames = 237;
  int annotation_cols = 16;  // 16 x 10 = 160 ground-truth points
  int annotation_rows = 10;
  double margin = 40.0;
  int return_interval = 40;
  int modes = 3;
  double amplitude = 10.0;
  int grid_cols = 6;
  int grid_rows = 6;
  std::uint64_t seed = 1;
  std::string texture_path;  // empty: procedural texture
  std::string degrade_mode = "none";
  double gaussian_sigma = 0.03;
  double sp_density = 0.05;
  int occluder_size = 60;

  void validate() const;
  void set(const std::string& key, const std::string& value);
  void apply(const KeyValueList& entries);
  KeyValueList to_key_values() const;

  DegradationSpec degradation() const;
};

}  // namespace meshtrack
