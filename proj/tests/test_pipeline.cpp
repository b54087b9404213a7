#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "meshtrack/errors.hpp"
#include "meshtrack/pipeline.hpp"
#include "meshtrack/synth.hpp"

using namespace meshtrack;

namespace {

// Small deforming scene with a mid-sequence return to the reference pose.
struct Scene {
  std::vector<Image> frames;
  TriangleMesh mesh;
  FlowSolverParams solver;

  Scene() {
    const Image tex = procedural_texture(64, 64, 400);
    const DeformationModel model = DeformationModel::random(64, 64, 8, 2, 2.5, 4, 4, 401);
    SequenceArtifacts art = generate_sequence(tex, model, 17, 4, 4, 10.0, 2);
    frames = std::move(art.frames);
    mesh = std::move(art.mesh);
    solver.iterations = 40;
    solver.warps = 2;
    solver.pyramid_levels = 3;
  }
};

std::string serialize(const TrackedSequence& tracked) {
  std::ostringstream out;
  for (const TriangleMesh& mesh : tracked.meshes) {
    for (const Vec2& v : mesh.vertices) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g %.17g;", v.x, v.y);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

TEST_CASE("a static two-frame sequence tracks to the reference mesh everywhere") {
  const Image tex = procedural_texture(64, 64, 402);
  const std::vector<Image> frames{tex, tex};
  const TriangleMesh mesh = lattice_mesh(10, 10, 54, 54, 4, 4);
  PipelineConfig config;
  config.solver.iterations = 30;
  config.solver.pyramid_levels = 3;
  config.workers = 2;
  const FlowChainCache cache = build_flow_cache(frames, config.solver, "", 2);
  const TrackResult result = track_sequence(frames, 0, mesh, cache, config);

  REQUIRE(result.tracked.meshes.size() == 2);
  CHECK(result.tracked.meshes[0].vertices == mesh.vertices);  // bitwise
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    CHECK((result.tracked.meshes[1].vertices[i] - mesh.vertices[i]).norm() < 0.1);
}

TEST_CASE("worker count does not change the result") {
  const Scene scene;
  PipelineConfig config;
  config.solver = scene.solver;
  const FlowChainCache cache = build_flow_cache(scene.frames, config.solver, "", 2);

  config.workers = 1;
  const TrackResult a = track_sequence(scene.frames, 0, scene.mesh, cache, config);
  config.workers = 4;
  const TrackResult b = track_sequence(scene.frames, 0, scene.mesh, cache, config);
  CHECK(serialize(a.tracked) == serialize(b.tracked));
}

TEST_CASE("apo with anchors and patches disabled equals baseline bitwise") {
  const Scene scene;
  PipelineConfig config;
  config.solver = scene.solver;
  config.workers = 2;
  const FlowChainCache cache = build_flow_cache(scene.frames, config.solver, "", 2);

  config.mode = "baseline";
  const TrackResult baseline = track_sequence(scene.frames, 0, scene.mesh, cache, config);
  config.mode = "apo";
  config.no_anchor_frames = true;
  config.no_patches = true;
  const TrackResult ablated = track_sequence(scene.frames, 0, scene.mesh, cache, config);
  CHECK(serialize(baseline.tracked) == serialize(ablated.tracked));
  for (std::size_t f = 0; f < baseline.tracked.provenance.size(); ++f)
    CHECK(baseline.tracked.provenance[f] == ablated.tracked.provenance[f]);
}

TEST_CASE("apo with feature fraction zero equals anchor-frames mode") {
  const Scene scene;
  PipelineConfig config;
  config.solver = scene.solver;
  config.workers = 2;
  const FlowChainCache cache = build_flow_cache(scene.frames, config.solver, "", 2);

  config.mode = "anchor-frames";
  const TrackResult anchors_only = track_sequence(scene.frames, 0, scene.mesh, cache, config);
  config.mode = "apo";
  config.feature_fraction = 0.0;
  const TrackResult apo0 = track_sequence(scene.frames, 0, scene.mesh, cache, config);
  CHECK(serialize(anchors_only.tracked) == serialize(apo0.tracked));
}

TEST_CASE("feature-free frames degrade apo to flow tracking instead of failing") {
  const std::vector<Image> frames{Image(48, 48, 0.5f), Image(48, 48, 0.5f),
                                  Image(48, 48, 0.5f)};
  const TriangleMesh mesh = lattice_mesh(8, 8, 40, 40, 3, 3);
  PipelineConfig config;
  config.solver.iterations = 20;
  config.solver.pyramid_levels = 2;
  config.workers = 2;
  const FlowChainCache cache = build_flow_cache(frames, config.solver, "", 2);
  const TrackResult result = track_sequence(frames, 0, mesh, cache, config);
  CHECK(result.anchor_count == 1);  // only the reference qualifies
  CHECK(result.patch_count == 0);
  for (const auto& m : result.tracked.meshes)
    CHECK(m.vertices.size() == mesh.vertices.size());
}

TEST_CASE("tracked topology never changes and frame 0 is the reference mesh") {
  const Scene scene;
  PipelineConfig config;
  config.solver = scene.solver;
  config.workers = 2;
  const FlowChainCache cache = build_flow_cache(scene.frames, config.solver, "", 2);
  const TrackResult result = track_sequence(scene.frames, 0, scene.mesh, cache, config);
  CHECK(result.tracked.meshes[0].vertices == scene.mesh.vertices);
  for (const TriangleMesh& m : result.tracked.meshes) {
    CHECK(m.same_topology(scene.mesh));
    CHECK(m.vertices.size() == scene.mesh.vertices.size());
  }
  for (const auto& prov : result.tracked.provenance)
    CHECK(prov.size() == scene.mesh.vertices.size());
}

TEST_CASE("mesh vertices outside the frame are rejected") {
  const Image tex = procedural_texture(48, 48, 403);
  const std::vector<Image> frames{tex, tex};
  TriangleMesh mesh = lattice_mesh(8, 8, 40, 40, 3, 3);
  mesh.vertices[0] = {-5, 10};
  PipelineConfig config;
  config.solver.iterations = 10;
  config.solver.pyramid_levels = 2;
  const FlowChainCache cache = build_flow_cache(frames, config.solver, "", 2);
  CHECK_THROWS_AS(track_sequence(frames, 0, mesh, cache, config), InputError);
}
