#pragma once

#include <optional>
#include <string>
#include <vector>

#include "meshtrack/anchors.hpp"
#include "meshtrack/error_score.hpp"
#include "meshtrack/flow_chain.hpp"
#include "meshtrack/mesh.hpp"
#include "meshtrack/patches.hpp"

namespace meshtrack {

// How each tracked vertex position was produced.
enum class Provenance : std::uint8_t {
  Flow,               // pure flow-chain advection
  Patch,              // anchor-patch candidate dominated (zero error)
  Blended,            // conflict-resolved mix of flow and patch candidates
  BarycentricRepair,  // rebuilt from nearby low-error correspondences
};

const char* provenance_name(Provenance p);

// One mesh per frame plus per-vertex provenance. Topology never changes;
// the reference frame's mesh is the reference mesh bit for bit.
struct TrackedSequence {
  std::vector<TriangleMesh> meshes;
  std::vector<std::vector<Provenance>> provenance;
};

// Weighted blend of a flow-propagated candidate and a patch candidate, each
// weighted by the other's error:
//
//   v = (e_patch * v_flow + e_flow * v_patch) / (e_patch + e_flow)
//
// A zero-error candidate therefore wins outright, equal errors meet at the
// midpoint (including the 0/0 case), and a non-finite error forfeits to the
// other candidate (flow wins when both are unusable, since flow is always
// defined). The result lies on the segment between the candidates.
Vec2 resolve_conflict(const Vec2& v_flow, const Vec2& v_patch, double e_flow, double e_patch);

// N-candidate form used to sanity-check the two-candidate algebra: weights
// proportional to 1/error, normalized; reduces to resolve_conflict for two.
Vec2 blend_candidates(const std::vector<Vec2>& candidates, const std::vector<double>& errors);

// Per-frame patch lists with a vertex -> patch index for O(1) lookup.
class PatchTable {
 public:
  PatchTable(std::vector<std::vector<AnchorPatch>> per_frame, int vertex_count);

  int frame_count() const { return int(per_frame_.size()); }
  const std::vector<std::vector<AnchorPatch>>& per_frame() const { return per_frame_; }
  const AnchorPatch* find(int frame, int vertex_id) const;

 private:
  std::vector<std::vector<AnchorPatch>> per_frame_;
  std::vector<std::vector<int>> index_;  // [frame][vertex] -> patch index or -1
};

// The patch for vertex_id on the clip frame temporally closest to `target`
// (|k| minimal, ties to the earlier frame; a patch on the target itself
// always wins). Returns the patch and its source frame.
std::optional<std::pair<const AnchorPatch*, int>> find_nearest_anchor_patch(
    int vertex_id, int target, const PatchTable& patches, const Clip& clip);

// Read-only inputs shared by the propagation passes. ref_mesh carries the
// original vertex positions on the reference frame; every candidate error is
// scored between the reference patch at that position and the target patch
// at the candidate.
struct PropagationContext {
  const std::vector<Image>* frames = nullptr;
  const FlowChainCache* cache = nullptr;
  const TriangleMesh* ref_mesh = nullptr;
  int reference = 0;
  double eta = 0.08;
  ErrorWeights weights;
};

// Advects every vertex of the reference mesh to the anchor frame through the
// pairwise flow chain, eliminates vertices whose error score exceeds eta and
// rebuilds them by barycentric mapping over the three nearest surviving
// vertices and feature matches. Unrepairable vertices keep their flow
// position. provenance_out (optional) receives one tag per vertex.
TriangleMesh propagate_to_anchor(const TriangleMesh& ref_mesh, int anchor,
                                 const FeatureMatchSet& matches, const PropagationContext& ctx,
                                 std::vector<Provenance>* provenance_out = nullptr);

// Fills every non-anchor frame of the clip: candidate A is the anchor mesh
// advected along the flow chain, candidate B the nearest anchor patch
// advected from its source frame; conflicts are resolved by error-weighted
// blending against the reference patch around each vertex. Vertices without
// a patch take candidate A. The anchor frame itself is left untouched.
void propagate_clip(const TriangleMesh& anchor_mesh, const Clip& clip, const PatchTable& patches,
                    const PropagationContext& ctx, TrackedSequence& out);

void write_provenance_csv(const std::vector<Provenance>& tags, const std::string& path);

}  // namespace meshtrack
