#include "meshtrack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>

#include "meshtrack/errors.hpp"
#include "meshtrack/flow_io.hpp"
#include "meshtrack/flow_solver.hpp"
#include "meshtrack/parallel.hpp"
#include "meshtrack/rng.hpp"

namespace fs = std::filesystem;

namespace meshtrack {

namespace {

void say(const LogFn& log, const std::string& msg) {
  if (log) log(msg);
}

int resolve_workers(int configured) {
  return configured > 0 ? configured : default_workers();
}

}  // namespace

FlowChainCache build_flow_cache(const std::vector<Image>& frames, const FlowSolverParams& params,
                                const std::string& cache_dir, int workers, const LogFn& log) {
  if (frames.size() < 2) throw InputError("build_flow_cache: need at least 2 frames");
  const int pairs = int(frames.size()) - 1;
  std::vector<FlowField> fwd(pairs), bwd(pairs);
  std::vector<char> fwd_hit(pairs, 0), bwd_hit(pairs, 0);

  if (!cache_dir.empty() && fs::is_directory(cache_dir)) {
    for (int i = 0; i < pairs; ++i) {
      const auto try_load = [&](bool forward, FlowField& slot, char& hit) {
        const fs::path p = fs::path(cache_dir) / flo_cache_name(forward, i);
        if (!fs::exists(p)) return;
        FlowField f = read_flo(p.string());
        if (f.width() == frames[0].width() && f.height() == frames[0].height()) {
          slot = std::move(f);
          hit = 1;
        }
      };
      try_load(true, fwd[i], fwd_hit[i]);
      try_load(false, bwd[i], bwd_hit[i]);
    }
  }

  const int hits = std::accumulate(fwd_hit.begin(), fwd_hit.end(), 0) +
                   std::accumulate(bwd_hit.begin(), bwd_hit.end(), 0);
  say(log, "flow cache: " + std::to_string(hits) + "/" + std::to_string(2 * pairs) +
               " fields loaded from " + (cache_dir.empty() ? "(no cache)" : cache_dir));

  // Each task is one direction of one pair, so both cores stay busy even for
  // short sequences.
  parallel_for(std::size_t(pairs) * 2, resolve_workers(workers), [&](std::size_t task) {
    const int i = int(task / 2);
    const bool forward = task % 2 == 0;
    if (forward) {
      if (!fwd_hit[i]) fwd[i] = estimate_flow(frames[i], frames[i + 1], params);
    } else {
      if (!bwd_hit[i]) bwd[i] = estimate_flow(frames[i + 1], frames[i], params);
    }
  });

  if (!cache_dir.empty()) {
    fs::create_directories(cache_dir);
    int written = 0;
    for (int i = 0; i < pairs; ++i) {
      if (!fwd_hit[i]) {
        write_flo(fwd[i], (fs::path(cache_dir) / flo_cache_name(true, i)).string());
        ++written;
      }
      if (!bwd_hit[i]) {
        write_flo(bwd[i], (fs::path(cache_dir) / flo_cache_name(false, i)).string());
        ++written;
      }
    }
    if (written > 0)
      say(log, "flow cache: wrote " + std::to_string(written) + " fields to " + cache_dir);
  }
  return FlowChainCache(std::move(fwd), std::move(bwd));
}

TrackResult track_sequence(const std::vector<Image>& frames, int reference,
                           const TriangleMesh& mesh, const FlowChainCache& cache,
                           const PipelineConfig& config, const LogFn& log) {
  config.validate();
  mesh.validate();
  const int n_frames = int(frames.size());
  if (n_frames < 2) throw InputError("track_sequence: need at least 2 frames");
  if (cache.frame_count() != n_frames)
    throw InputError("track_sequence: flow cache does not match the sequence");
  if (reference < 0 || reference >= n_frames)
    throw InputError("track_sequence: reference index out of range");
  for (const Vec2& v : mesh.vertices)
    if (v.x < 0 || v.x > frames[0].width() - 1 || v.y < 0 || v.y > frames[0].height() - 1)
      throw InputError("track_sequence: mesh vertex outside the reference frame");

  const int workers = resolve_workers(config.workers);
  const bool use_anchors = config.mode != "baseline" && !config.no_anchor_frames;
  const bool use_patches = config.mode == "apo" && !config.no_patches;
  const bool need_features = use_anchors || use_patches;
  const int n_vertices = int(mesh.vertices.size());

  TrackResult result;
  result.eta_effective = config.eta;

  // Step 2/3 groundwork: features on every frame, matches reference->i.
  std::vector<std::vector<Feature>> features(n_frames);
  std::vector<FeatureMatchSet> matches(n_frames);
  if (need_features) {
    if (!config.feature_cache_dir.empty()) fs::create_directories(config.feature_cache_dir);
    parallel_for(std::size_t(n_frames), workers, [&](std::size_t i) {
      if (!config.feature_cache_dir.empty()) {
        char name[48];
        std::snprintf(name, sizeof(name), "features_%04zu.bin", i);
        const fs::path p = fs::path(config.feature_cache_dir) / name;
        if (fs::exists(p)) {
          features[i] = read_feature_cache(p.string());
          return;
        }
        features[i] = detect_features(frames[i], config.detector);
        write_feature_cache(features[i], p.string());
        return;
      }
      features[i] = detect_features(frames[i], config.detector);
    });
    std::size_t total = 0;
    for (const auto& f : features) total += f.size();
    say(log, "features: " + std::to_string(total) + " across " + std::to_string(n_frames) +
                 " frames (" + std::to_string(total / std::max(n_frames, 1)) + " avg)");

    parallel_for(std::size_t(n_frames), workers, [&](std::size_t i) {
      if (int(i) == reference) return;
      const auto raw = match_features(features[reference], features[i], config.match_ratio);
      matches[i] = reject_outliers(raw, features[reference], features[i], config.tau, int(i));
    });

    result.scores.resize(n_frames);
    parallel_for(std::size_t(n_frames), workers, [&](std::size_t i) {
      if (int(i) == reference) {
        result.scores[i] = {int(i), 0.0, int(features[reference].size())};
        return;
      }
      result.scores[i] = frame_general_error(frames[reference], frames[i], matches[i],
                                             config.weights, config.anchor_policy.min_matches);
    });

    if (config.eta_auto) {
      // Calibration: 2x the median error score of accepted matches.
      std::vector<std::vector<double>> per_frame(n_frames);
      parallel_for(std::size_t(n_frames), workers, [&](std::size_t i) {
        if (int(i) == reference) return;
        for (const MatchPair& pair : matches[i].pairs) {
          if (!error_score_in_bounds(frames[reference], pair.reference.position)) continue;
          per_frame[i].push_back(error_score(frames[reference], frames[i],
                                             pair.reference.position, pair.displacement(),
                                             config.weights));
        }
      });
      std::vector<double> all;
      for (auto& v : per_frame) all.insert(all.end(), v.begin(), v.end());
      if (!all.empty()) {
        std::sort(all.begin(), all.end());
        result.eta_effective = 2.0 * all[all.size() / 2];
        say(log, "eta_auto: calibrated eta = " + std::to_string(result.eta_effective));
      }
    }
  }

  // Step 2.3: anchor frames and the clip partition.
  if (use_anchors) {
    result.partition = select_anchor_frames(result.scores, reference, config.anchor_policy);
  } else {
    result.partition.anchor_indices = {reference};
    result.partition.clips = {{reference, 0, n_frames}};
  }
  result.anchor_count = int(result.partition.anchor_indices.size());
  say(log, "anchors: " + std::to_string(result.anchor_count) + " (" +
               std::to_string(result.partition.clips.size()) + " clips)");

  // Step 3: anchor patches on non-anchor frames, optionally from a feature
  // subset (the subset applies to patch labeling only; scoring and anchor
  // repair always see the full match sets).
  std::vector<std::vector<AnchorPatch>> patch_lists(n_frames);
  if (use_patches && config.feature_fraction > 0.0 && need_features) {
    std::vector<char> keep(features[reference].size(), 1);
    if (config.feature_fraction < 1.0) {
      const std::size_t n_ref = features[reference].size();
      const std::size_t target = std::size_t(std::lround(config.feature_fraction * n_ref));
      std::vector<std::size_t> order(n_ref);
      std::iota(order.begin(), order.end(), 0);
      Rng rng = Rng(config.seed).fork(0x66726163ULL);
      for (std::size_t i = n_ref; i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_index(i)]);
      keep.assign(n_ref, 0);
      for (std::size_t i = 0; i < target; ++i) keep[order[i]] = 1;
    }

    PatchParams patch_params;
    patch_params.eta = result.eta_effective;
    patch_params.search_radius = config.patch_search_radius;
    patch_params.max_search_radius = config.patch_max_search_radius;

    std::vector<char> is_anchor(n_frames, 0);
    for (int a : result.partition.anchor_indices) is_anchor[a] = 1;

    parallel_for(std::size_t(n_frames), workers, [&](std::size_t i) {
      if (is_anchor[i]) return;
      FeatureMatchSet subset;
      subset.target_frame = matches[i].target_frame;
      for (const MatchPair& pair : matches[i].pairs)
        if (keep[pair.reference_index]) subset.pairs.push_back(pair);
      patch_lists[i] = label_anchor_patches(mesh, subset, frames[reference], frames[i],
                                            patch_params, config.weights);
    });
    for (const auto& l : patch_lists) result.patch_count += int(l.size());
    say(log, "patches: " + std::to_string(result.patch_count) + " labeled");
  }
  PatchTable patch_table(patch_lists, n_vertices);
  result.patches = patch_table.per_frame();

  // Step 4: propagate to anchors, then through each clip.
  PropagationContext ctx;
  ctx.frames = &frames;
  ctx.cache = &cache;
  ctx.ref_mesh = &mesh;
  ctx.reference = reference;
  ctx.eta = result.eta_effective;
  ctx.weights = config.weights;

  result.tracked.meshes.assign(n_frames, TriangleMesh{});
  result.tracked.provenance.assign(n_frames, {});

  const auto& anchors = result.partition.anchor_indices;
  std::vector<TriangleMesh> anchor_meshes(anchors.size());
  std::vector<std::vector<Provenance>> anchor_prov(anchors.size());
  parallel_for(anchors.size(), workers, [&](std::size_t k) {
    const int a = anchors[k];
    if (a == reference) {
      anchor_meshes[k] = mesh;
      anchor_prov[k].assign(n_vertices, Provenance::Flow);
    } else {
      anchor_meshes[k] =
          propagate_to_anchor(mesh, a, matches[a], ctx, &anchor_prov[k]);
    }
  });
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    result.tracked.meshes[anchors[k]] = anchor_meshes[k];
    result.tracked.provenance[anchors[k]] = anchor_prov[k];
  }

  parallel_for(result.partition.clips.size(), workers, [&](std::size_t c) {
    const Clip& clip = result.partition.clips[c];
    const std::size_t k =
        std::find(anchors.begin(), anchors.end(), clip.anchor) - anchors.begin();
    propagate_clip(anchor_meshes[k], clip, patch_table, ctx, result.tracked);
  });

  return result;
}

}  // namespace meshtrack
