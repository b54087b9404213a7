#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "meshtrack/propagation.hpp"
#include "meshtrack/rng.hpp"
#include "meshtrack/synth.hpp"

using namespace meshtrack;

namespace {

FlowField constant_field(int w, int h, const Vec2& v) {
  FlowField f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) f.set(x, y, v);
  return f;
}

FlowField smooth_field(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  const double ax = rng.uniform(-2.0, 2.0), ay = rng.uniform(-2.0, 2.0);
  FlowField f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      f.set(x, y, {ax * std::sin(2.0 * M_PI * x / w), ay * std::cos(2.0 * M_PI * y / h)});
  return f;
}

}  // namespace

TEST_CASE("advecting through a zero field leaves the vertex unchanged") {
  const FlowField zero = constant_field(16, 16, {0, 0});
  const Vec2 v{7.3, 4.1};
  CHECK(advect_vertex(v, zero) == v);
}

TEST_CASE("advecting through a constant field adds the displacement") {
  const FlowField f = constant_field(32, 32, {2, 1});
  const Vec2 out = advect_vertex({10, 10}, f);
  CHECK(out.x == doctest::Approx(12.0));
  CHECK(out.y == doctest::Approx(11.0));
}

TEST_CASE("advection matches direct sampling on smooth fields") {
  const FlowField f = smooth_field(24, 24, 9);
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec2 v{rng.uniform(0, 23), rng.uniform(0, 23)};
    const Vec2 got = advect_vertex(v, f);
    const Vec2 want = v + f.sample(v.x, v.y);
    CHECK(got.x == doctest::Approx(want.x).epsilon(1e-12));
    CHECK(got.y == doctest::Approx(want.y).epsilon(1e-12));
  }
}

TEST_CASE("equal errors meet at the midpoint") {
  const Vec2 out = resolve_conflict({10, 10}, {14, 10}, 2.0, 2.0);
  CHECK(out.x == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(out.y == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("a zero-error candidate wins outright") {
  const Vec2 patch = resolve_conflict({10, 10}, {14, 10}, 3.0, 0.0);
  CHECK(patch.x == doctest::Approx(14.0).epsilon(1e-12));
  const Vec2 flow = resolve_conflict({10, 10}, {14, 10}, 0.0, 3.0);
  CHECK(flow.x == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("hand-evaluated cross weighting") {
  // (1*10 + 3*14) / 4 = 13
  const Vec2 out = resolve_conflict({10, 10}, {14, 10}, 3.0, 1.0);
  CHECK(out.x == doctest::Approx(13.0).epsilon(1e-12));
  CHECK(out.y == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("both-zero errors meet at the midpoint, non-finite errors forfeit") {
  const Vec2 mid = resolve_conflict({2, 2}, {6, 4}, 0.0, 0.0);
  CHECK(mid.x == doctest::Approx(4.0));
  CHECK(mid.y == doctest::Approx(3.0));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(resolve_conflict({2, 2}, {6, 4}, inf, 1.0) == Vec2{6, 4});
  CHECK(resolve_conflict({2, 2}, {6, 4}, 1.0, inf) == Vec2{2, 2});
  CHECK(resolve_conflict({2, 2}, {6, 4}, inf, inf) == Vec2{2, 2});
  CHECK_THROWS_AS(resolve_conflict({0, 0}, {1, 1}, -1.0, 0.5), std::invalid_argument);
}

TEST_CASE("resolved position stays on the segment and swapping is symmetric") {
  Rng rng(20);
  for (int trial = 0; trial < 300; ++trial) {
    const Vec2 a{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const Vec2 b{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const double ea = rng.uniform(0.0, 5.0);
    const double eb = rng.uniform(0.0, 5.0);
    const Vec2 out = resolve_conflict(a, b, ea, eb);
    const Vec2 swapped = resolve_conflict(b, a, eb, ea);
    CHECK(out.x == doctest::Approx(swapped.x).epsilon(1e-12));
    CHECK(out.y == doctest::Approx(swapped.y).epsilon(1e-12));
    // convex combination: out = a + t (b - a) with t in [0, 1]
    const Vec2 d = b - a;
    const double t = d.norm2() > 0 ? ((out - a).x * d.x + (out - a).y * d.y) / d.norm2() : 0.0;
    CHECK(t >= -1e-12);
    CHECK(t <= 1.0 + 1e-12);
    const double off_segment = std::abs(cross2(a, b, out));
    CHECK(off_segment <= 1e-9 * (1.0 + d.norm2()));
  }
}

TEST_CASE("the N-candidate blend reduces to the pairwise rule") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec2 a{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    const Vec2 b{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    const double ea = rng.uniform(0.01, 5.0);
    const double eb = rng.uniform(0.01, 5.0);
    const Vec2 direct = resolve_conflict(a, b, ea, eb);
    const Vec2 general = blend_candidates({a, b}, {ea, eb});
    CHECK(general.x == doctest::Approx(direct.x).epsilon(1e-9));
    CHECK(general.y == doctest::Approx(direct.y).epsilon(1e-9));
  }
}

TEST_CASE("nearest anchor patch picks the smallest |k|, ties to the earlier frame") {
  const int vertex_count = 4;
  std::vector<std::vector<AnchorPatch>> lists(12);
  const int i = 6;
  lists[i - 5].push_back({0, i - 5, {1, 1}, 0.01});
  lists[i + 2].push_back({0, i + 2, {2, 2}, 0.01});
  lists[i - 3].push_back({1, i - 3, {3, 3}, 0.01});
  lists[i + 3].push_back({1, i + 3, {4, 4}, 0.01});
  const PatchTable table(lists, vertex_count);
  const Clip clip{4, 0, 12};

  // vertex 0: candidates at |k| = 5 and 2 -> the later-but-closer frame i+2
  const auto v0 = find_nearest_anchor_patch(0, i, table, clip);
  REQUIRE(v0.has_value());
  CHECK(v0->second == i + 2);
  // vertex 1: tie |k| = 3 both sides -> earlier frame
  const auto v1 = find_nearest_anchor_patch(1, i, table, clip);
  REQUIRE(v1.has_value());
  CHECK(v1->second == i - 3);
  // vertex 2: no patches anywhere
  CHECK(!find_nearest_anchor_patch(2, i, table, clip).has_value());
  // a patch on the target frame itself always wins
  std::vector<std::vector<AnchorPatch>> lists2 = lists;
  lists2[i].push_back({0, i, {9, 9}, 0.0});
  const PatchTable table2(lists2, vertex_count);
  const auto k0 = find_nearest_anchor_patch(0, i, table2, clip);
  REQUIRE(k0.has_value());
  CHECK(k0->second == i);
}

TEST_CASE("patches outside the clip are ignored") {
  std::vector<std::vector<AnchorPatch>> lists(10);
  lists[1].push_back({0, 1, {1, 1}, 0.01});  // outside [4, 9)
  const PatchTable table(lists, 1);
  const Clip clip{5, 4, 9};
  CHECK(!find_nearest_anchor_patch(0, 6, table, clip).has_value());
  CHECK_THROWS_AS(find_nearest_anchor_patch(0, 2, table, clip), std::out_of_range);
}

namespace {

struct AnchorScene {
  std::vector<Image> frames;
  std::vector<FlowField> fwd, bwd;
  TriangleMesh mesh;
  FeatureMatchSet matches;  // exact self-correspondences
};

// Two-frame scene whose second frame equals the first; flow is zero except
// an optional small blob that corrupts one vertex trajectory. Matches are
// exact identity correspondences on a scattered grid.
AnchorScene identical_pair_scene(bool corrupt_vertex, int corrupt_id) {
  AnchorScene scene;
  const Image tex = procedural_texture(64, 64, 90);
  scene.frames = {tex, tex};
  scene.mesh = lattice_mesh(10, 10, 54, 54, 5, 5);
  FlowField fwd = FlowField(64, 64);
  if (corrupt_vertex) {
    const Vec2 v = scene.mesh.vertices[corrupt_id];
    for (int dy = -2; dy <= 2; ++dy)
      for (int dx = -2; dx <= 2; ++dx)
        fwd.set(int(v.x) + dx, int(v.y) + dy, {8.0, 0.0});
  }
  scene.fwd = {fwd};
  scene.bwd = {FlowField(64, 64)};
  scene.matches.target_frame = 1;
  int index = 0;
  for (double y = 6; y < 60; y += 9)
    for (double x = 7.5; x < 60; x += 9) {
      Feature f;
      f.position = {x, y};
      scene.matches.pairs.push_back({f, f, 0.0, index, index});
      ++index;
    }
  return scene;
}

}  // namespace

TEST_CASE("identical anchor frame with zero flow reproduces the reference mesh") {
  const AnchorScene scene = identical_pair_scene(false, 0);
  const FlowChainCache cache(scene.fwd, scene.bwd);
  PropagationContext ctx;
  ctx.frames = &scene.frames;
  ctx.cache = &cache;
  ctx.ref_mesh = &scene.mesh;
  ctx.reference = 0;
  ctx.eta = 0.08;
  std::vector<Provenance> prov;
  const TriangleMesh out = propagate_to_anchor(scene.mesh, 1, scene.matches, ctx, &prov);
  for (std::size_t i = 0; i < out.vertices.size(); ++i) {
    CHECK(out.vertices[i] == scene.mesh.vertices[i]);
    CHECK(prov[i] == Provenance::Flow);
  }
}

TEST_CASE("a corrupted vertex is repaired from its surviving neighbours") {
  const int corrupt_id = 12;  // interior vertex of the 5x5 lattice
  const AnchorScene scene = identical_pair_scene(true, corrupt_id);
  const FlowChainCache cache(scene.fwd, scene.bwd);
  PropagationContext ctx;
  ctx.frames = &scene.frames;
  ctx.cache = &cache;
  ctx.ref_mesh = &scene.mesh;
  ctx.reference = 0;
  ctx.eta = 0.05;

  // The corrupted flow pushes the vertex onto the wrong texture.
  const Vec2 wrong = cache.advect_point(scene.mesh.vertices[corrupt_id], 0, 1);
  REQUIRE((wrong - scene.mesh.vertices[corrupt_id]).norm() > 4.0);

  std::vector<Provenance> prov;
  const TriangleMesh out = propagate_to_anchor(scene.mesh, 1, scene.matches, ctx, &prov);
  CHECK(prov[corrupt_id] == Provenance::BarycentricRepair);
  CHECK((out.vertices[corrupt_id] - scene.mesh.vertices[corrupt_id]).norm() < 1.0);
  for (int i = 0; i < int(out.vertices.size()); ++i)
    if (i != corrupt_id) CHECK(out.vertices[i] == scene.mesh.vertices[i]);
}

TEST_CASE("when every vertex exceeds eta, flow positions are kept") {
  // Second frame is unrelated texture: every score is high and there are no
  // surviving vertices or matches to repair from.
  const Image tex = procedural_texture(64, 64, 91);
  const Image other = procedural_texture(64, 64, 92);
  const std::vector<Image> frames{tex, other};
  std::vector<FlowField> fwd{FlowField(64, 64)}, bwd{FlowField(64, 64)};
  const FlowChainCache cache(fwd, bwd);
  const TriangleMesh mesh = lattice_mesh(10, 10, 54, 54, 4, 4);
  PropagationContext ctx;
  ctx.frames = &frames;
  ctx.cache = &cache;
  ctx.ref_mesh = &mesh;
  ctx.reference = 0;
  ctx.eta = 1e-6;
  FeatureMatchSet empty;
  empty.target_frame = 1;
  std::vector<Provenance> prov;
  const TriangleMesh out = propagate_to_anchor(mesh, 1, empty, ctx, &prov);
  for (std::size_t i = 0; i < out.vertices.size(); ++i) {
    CHECK(out.vertices[i] == mesh.vertices[i]);  // zero flow position
    CHECK(prov[i] == Provenance::Flow);
  }
}

TEST_CASE("zero flow and coincident patches keep the anchor mesh everywhere") {
  const Image tex = procedural_texture(48, 48, 93);
  const std::vector<Image> frames{tex, tex, tex};
  std::vector<FlowField> fwd(2, FlowField(48, 48)), bwd(2, FlowField(48, 48));
  const FlowChainCache cache(fwd, bwd);
  const TriangleMesh mesh = lattice_mesh(8, 8, 40, 40, 4, 4);

  std::vector<std::vector<AnchorPatch>> lists(3);
  for (int f = 1; f < 3; ++f)
    for (int vid = 0; vid < int(mesh.vertices.size()); ++vid)
      lists[f].push_back({vid, f, mesh.vertices[vid], 0.0});
  const PatchTable table(lists, int(mesh.vertices.size()));

  PropagationContext ctx;
  ctx.frames = &frames;
  ctx.cache = &cache;
  ctx.ref_mesh = &mesh;
  ctx.reference = 0;
  TrackedSequence out;
  out.meshes.assign(3, TriangleMesh{});
  out.provenance.assign(3, {});
  out.meshes[0] = mesh;
  propagate_clip(mesh, {0, 0, 3}, table, ctx, out);
  for (int f = 1; f < 3; ++f)
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      CHECK(out.meshes[f].vertices[i].x == doctest::Approx(mesh.vertices[i].x).epsilon(1e-12));
      CHECK(out.meshes[f].vertices[i].y == doctest::Approx(mesh.vertices[i].y).epsilon(1e-12));
    }
}

TEST_CASE("a clip holding only its anchor fills nothing") {
  const Image tex = procedural_texture(48, 48, 94);
  const std::vector<Image> frames{tex, tex};
  std::vector<FlowField> fwd(1, FlowField(48, 48)), bwd(1, FlowField(48, 48));
  const FlowChainCache cache(fwd, bwd);
  const TriangleMesh mesh = lattice_mesh(8, 8, 40, 40, 3, 3);
  const PatchTable table(std::vector<std::vector<AnchorPatch>>(2), int(mesh.vertices.size()));
  PropagationContext ctx;
  ctx.frames = &frames;
  ctx.cache = &cache;
  ctx.ref_mesh = &mesh;
  ctx.reference = 0;
  TrackedSequence out;
  out.meshes.assign(2, TriangleMesh{});
  out.provenance.assign(2, {});
  propagate_clip(mesh, {0, 0, 1}, table, ctx, out);
  CHECK(out.meshes[1].vertices.empty());  // untouched slot
}
