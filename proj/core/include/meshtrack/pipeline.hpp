#pragma once

#include <functional>
#include <string>
#include <vector>

#include "meshtrack/config.hpp"
#include "meshtrack/flow_chain.hpp"
#include "meshtrack/propagation.hpp"
#include "meshtrack/sequence.hpp"

namespace meshtrack {

// Optional progress sink; messages are one line each.
using LogFn = std::function<void(const std::string&)>;

// Pairwise forward/backward fields for the whole sequence. When cache_dir is
// non-empty, fields with matching dimensions are loaded from
// flow_f_%04d.flo / flow_b_%04d.flo instead of re-estimated, and freshly
// estimated ones are written back. Estimation runs one frame pair per
// worker; results do not depend on the worker count.
FlowChainCache build_flow_cache(const std::vector<Image>& frames, const FlowSolverParams& params,
                                const std::string& cache_dir, int workers,
                                const LogFn& log = nullptr);

struct TrackResult {
  TrackedSequence tracked;
  ClipPartition partition;
  std::vector<FrameScore> scores;                  // empty when anchors are disabled
  std::vector<std::vector<AnchorPatch>> patches;   // empty when patches are disabled
  double eta_effective = 0.0;
  int anchor_count = 0;
  int patch_count = 0;
};

// Runs the full tracking pipeline over in-memory frames and a prepared flow
// cache: feature matching, anchor-frame selection, anchor-patch labeling and
// mesh propagation. Deterministic for a fixed config regardless of worker
// count. Mode handling:
//   baseline       pure flow-chain propagation from the reference
//   anchor-frames  anchors + reference->anchor repair, no patches
//   apo            the full pipeline (no_anchor_frames / no_patches /
//                  feature_fraction carve it down for ablations)
TrackResult track_sequence(const std::vector<Image>& frames, int reference,
                           const TriangleMesh& mesh, const FlowChainCache& cache,
                           const PipelineConfig& config, const LogFn& log = nullptr);

}  // namespace meshtrack
