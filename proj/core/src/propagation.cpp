#include "meshtrack/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "meshtrack/barycentric.hpp"
#include "meshtrack/errors.hpp"

namespace meshtrack {

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Flow: return "flow";
    case Provenance::Patch: return "patch";
    case Provenance::Blended: return "blended";
    case Provenance::BarycentricRepair: return "barycentric-repair";
  }
  return "unknown";
}

Vec2 resolve_conflict(const Vec2& v_flow, const Vec2& v_patch, double e_flow, double e_patch) {
  if (e_flow < 0.0 || e_patch < 0.0)
    throw std::invalid_argument("resolve_conflict: errors must be non-negative");
  const bool flow_ok = std::isfinite(e_flow);
  const bool patch_ok = std::isfinite(e_patch);
  if (!flow_ok && !patch_ok) return v_flow;
  if (!flow_ok) return v_patch;
  if (!patch_ok) return v_flow;
  if (e_flow == 0.0 && e_patch == 0.0) return (v_flow + v_patch) * 0.5;
  return (v_flow * e_patch + v_patch * e_flow) / (e_flow + e_patch);
}

Vec2 blend_candidates(const std::vector<Vec2>& candidates, const std::vector<double>& errors) {
  if (candidates.empty() || candidates.size() != errors.size())
    throw std::invalid_argument("blend_candidates: bad candidate/error lists");

  // Exact-match candidates short-circuit the inverse weighting.
  Vec2 zero_sum{0, 0};
  int zero_count = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (errors[i] == 0.0) {
      zero_sum += candidates[i];
      ++zero_count;
    }
  if (zero_count > 0) return zero_sum / double(zero_count);

  double weight_sum = 0.0;
  Vec2 acc{0, 0};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!std::isfinite(errors[i]) || errors[i] < 0.0) continue;
    const double w = 1.0 / errors[i];
    acc += candidates[i] * w;
    weight_sum += w;
  }
  if (weight_sum == 0.0) return candidates[0];
  return acc / weight_sum;
}

PatchTable::PatchTable(std::vector<std::vector<AnchorPatch>> per_frame, int vertex_count)
    : per_frame_(std::move(per_frame)) {
  index_.resize(per_frame_.size());
  for (std::size_t f = 0; f < per_frame_.size(); ++f) {
    index_[f].assign(vertex_count, -1);
    for (int i = 0; i < int(per_frame_[f].size()); ++i) {
      const AnchorPatch& p = per_frame_[f][i];
      if (p.vertex_id < 0 || p.vertex_id >= vertex_count)
        throw std::invalid_argument("PatchTable: vertex id out of range");
      index_[f][p.vertex_id] = i;
    }
  }
}

const AnchorPatch* PatchTable::find(int frame, int vertex_id) const {
  if (frame < 0 || frame >= frame_count()) return nullptr;
  const int i = index_[frame][vertex_id];
  return i < 0 ? nullptr : &per_frame_[frame][i];
}

std::optional<std::pair<const AnchorPatch*, int>> find_nearest_anchor_patch(
    int vertex_id, int target, const PatchTable& patches, const Clip& clip) {
  if (target < clip.begin || target >= clip.end)
    throw std::out_of_range("find_nearest_anchor_patch: target outside clip");
  const int max_k = std::max(target - clip.begin, clip.end - 1 - target);
  for (int k = 0; k <= max_k; ++k) {
    // Earlier frame first: ties at equal |k| go backwards in time.
    const int before = target - k;
    if (before >= clip.begin)
      if (const AnchorPatch* p = patches.find(before, vertex_id)) return {{p, before}};
    if (k == 0) continue;
    const int after = target + k;
    if (after < clip.end)
      if (const AnchorPatch* p = patches.find(after, vertex_id)) return {{p, after}};
  }
  return std::nullopt;
}

namespace {

struct RepairSource {
  Vec2 ref_pos;
  Vec2 target_pos;
};

// Rebuilds `v` from the three nearest sources by barycentric transfer.
// Returns nullopt when fewer than three sources exist or the triple is
// degenerate.
std::optional<Vec2> barycentric_repair(const Vec2& v, const std::vector<RepairSource>& sources) {
  if (sources.size() < 3) return std::nullopt;
  std::vector<std::pair<double, int>> order(sources.size());
  for (int i = 0; i < int(sources.size()); ++i)
    order[i] = {(sources[i].ref_pos - v).norm2(), i};
  std::partial_sort(order.begin(), order.begin() + 3, order.end());
  const RepairSource& s1 = sources[order[0].second];
  const RepairSource& s2 = sources[order[1].second];
  const RepairSource& s3 = sources[order[2].second];
  const auto triple = solve_barycentric(s1.ref_pos, s2.ref_pos, s3.ref_pos, v);
  if (!triple) return std::nullopt;
  return map_vertex(*triple, s1.target_pos, s2.target_pos, s3.target_pos);
}

}  // namespace

TriangleMesh propagate_to_anchor(const TriangleMesh& ref_mesh, int anchor,
                                 const FeatureMatchSet& matches, const PropagationContext& ctx,
                                 std::vector<Provenance>* provenance_out) {
  const std::vector<Image>& frames = *ctx.frames;
  const Image& ref_img = frames[ctx.reference];
  const Image& anchor_img = frames[anchor];
  const int n = int(ref_mesh.vertices.size());

  TriangleMesh out = ref_mesh;
  std::vector<Provenance> prov(n, Provenance::Flow);
  std::vector<double> score(n, 0.0);
  std::vector<bool> eliminated(n, false);

  for (int i = 0; i < n; ++i) {
    const Vec2& v = ref_mesh.vertices[i];
    out.vertices[i] = ctx.cache->advect_point(v, ctx.reference, anchor);
    if (!error_score_in_bounds(ref_img, v)) continue;  // border vertex, keep flow
    score[i] = error_score(ref_img, anchor_img, v, out.vertices[i] - v, ctx.weights);
    eliminated[i] = score[i] > ctx.eta;
  }

  // Repair sources are the frame's feature matches: direct long-range
  // correspondences that contain no accumulated flow error. Surviving
  // vertices are deliberately not used, since they share the chain's drift.
  std::vector<RepairSource> sources;
  sources.reserve(matches.pairs.size());
  for (const MatchPair& m : matches.pairs)
    sources.push_back({m.reference.position, m.target.position});

  for (int i = 0; i < n; ++i) {
    if (!eliminated[i]) continue;
    const Vec2& v = ref_mesh.vertices[i];
    const auto pos = barycentric_repair(v, sources);
    if (!pos) continue;
    const Vec2 repaired{std::clamp(pos->x, 0.0, double(anchor_img.width() - 1)),
                        std::clamp(pos->y, 0.0, double(anchor_img.height() - 1))};
    // Refinement: the repair must actually score better than the flow
    // position it replaces.
    const double repaired_score = error_score(ref_img, anchor_img, v, repaired - v, ctx.weights);
    if (repaired_score < score[i]) {
      out.vertices[i] = repaired;
      prov[i] = Provenance::BarycentricRepair;
    }
  }

  if (provenance_out) *provenance_out = std::move(prov);
  return out;
}

void propagate_clip(const TriangleMesh& anchor_mesh, const Clip& clip, const PatchTable& patches,
                    const PropagationContext& ctx, TrackedSequence& out) {
  const std::vector<Image>& frames = *ctx.frames;
  const FlowChainCache& cache = *ctx.cache;
  const TriangleMesh& ref_mesh = *ctx.ref_mesh;
  const Image& ref_img = frames[ctx.reference];
  const int n = int(anchor_mesh.vertices.size());
  if (int(ref_mesh.vertices.size()) != n)
    throw std::invalid_argument("propagate_clip: anchor/reference mesh size mismatch");

  // One directional pass; flow_traj carries the pure flow-chain candidate,
  // never the conflict-resolved position.
  const auto run_side = [&](int step) {
    std::vector<Vec2> flow_traj(n);
    for (int i = 0; i < n; ++i) flow_traj[i] = anchor_mesh.vertices[i];
    for (int frame = clip.anchor + step; frame >= clip.begin && frame < clip.end; frame += step) {
      const FlowField& link =
          step > 0 ? cache.forward(frame - 1) : cache.backward(frame);
      for (int i = 0; i < n; ++i) flow_traj[i] = advect_vertex(flow_traj[i], link);

      TriangleMesh mesh = anchor_mesh;  // topology template
      std::vector<Provenance> prov(n, Provenance::Flow);
      const Image& img = frames[frame];
      for (int vid = 0; vid < n; ++vid) {
        const Vec2 cand_flow = flow_traj[vid];
        Vec2 final_pos = cand_flow;
        Provenance tag = Provenance::Flow;

        const auto found = find_nearest_anchor_patch(vid, frame, patches, clip);
        const Vec2& v_ref = ref_mesh.vertices[vid];
        if (found && error_score_in_bounds(ref_img, v_ref)) {
          const auto& [patch, src_frame] = *found;
          const Vec2 cand_patch = src_frame == frame
                                      ? patch->position
                                      : cache.advect_point(patch->position, src_frame, frame);
          const double e_flow =
              error_score(ref_img, img, v_ref, cand_flow - v_ref, ctx.weights);
          const double e_patch =
              error_score(ref_img, img, v_ref, cand_patch - v_ref, ctx.weights);
          final_pos = resolve_conflict(cand_flow, cand_patch, e_flow, e_patch);
          if (e_patch == 0.0 && e_flow > 0.0)
            tag = Provenance::Patch;
          else if (e_flow == 0.0 && e_patch > 0.0)
            tag = Provenance::Flow;
          else
            tag = Provenance::Blended;
        }
        mesh.vertices[vid] = final_pos;
        prov[vid] = tag;
      }
      out.meshes[frame] = std::move(mesh);
      out.provenance[frame] = std::move(prov);
    }
  };

  run_side(+1);
  run_side(-1);
}

void write_provenance_csv(const std::vector<Provenance>& tags, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write provenance csv: " + path);
  out << "vertex_id,provenance\n";
  for (int i = 0; i < int(tags.size()); ++i)
    out << i << "," << provenance_name(tags[i]) << "\n";
}

}  // namespace meshtrack
