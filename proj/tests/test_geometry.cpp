#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "meshtrack/barycentric.hpp"
#include "meshtrack/patches.hpp"
#include "meshtrack/rng.hpp"
#include "meshtrack/synth.hpp"

using namespace meshtrack;

namespace {

struct Affine {
  double a, b, c, d, tx, ty;
  Vec2 apply(const Vec2& p) const { return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty}; }
};

Affine random_affine(Rng& rng) {
  Affine m{};
  do {
    m.a = rng.uniform(-2.0, 2.0);
    m.b = rng.uniform(-2.0, 2.0);
    m.c = rng.uniform(-2.0, 2.0);
    m.d = rng.uniform(-2.0, 2.0);
  } while (std::abs(m.a * m.d - m.b * m.c) < 0.1);
  m.tx = rng.uniform(-20.0, 20.0);
  m.ty = rng.uniform(-20.0, 20.0);
  return m;
}

Vec2 random_point(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

}  // namespace

TEST_CASE("vertex coinciding with a feature gets weight one") {
  const Vec2 f1{3, 4}, f2{10, 4}, f3{6, 12};
  const auto t = solve_barycentric(f1, f2, f3, f1);
  REQUIRE(t.has_value());
  CHECK(t->beta1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t->beta2 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t->beta3 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("centroid gets equal weights") {
  const Vec2 f1{0, 0}, f2{9, 0}, f3{0, 9};
  const Vec2 centroid = (f1 + f2 + f3) / 3.0;
  const auto t = solve_barycentric(f1, f2, f3, centroid);
  REQUIRE(t.has_value());
  CHECK(t->beta1 == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(t->beta2 == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(t->beta3 == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("hand-solved triple") {
  const auto t = solve_barycentric({0, 0}, {4, 0}, {0, 4}, {1, 1});
  REQUIRE(t.has_value());
  CHECK(t->beta1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t->beta2 == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(t->beta3 == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("collinear triples are rejected") {
  CHECK(!solve_barycentric({0, 0}, {1, 1}, {2, 2}, {1, 0}).has_value());
  CHECK(!solve_barycentric({0, 0}, {5, 0}, {10, 0}, {1, 1}).has_value());
  CHECK(!solve_barycentric({1, 1}, {1, 1}, {3, 2}, {1, 1}).has_value());
}

TEST_CASE("weights always sum to one") {
  Rng rng(10);
  for (int trial = 0; trial < 500; ++trial) {
    const Vec2 f1 = random_point(rng, 0, 50);
    const Vec2 f2 = random_point(rng, 0, 50);
    const Vec2 f3 = random_point(rng, 0, 50);
    const auto t = solve_barycentric(f1, f2, f3, random_point(rng, 0, 50));
    if (!t) continue;
    CHECK(t->beta1 + t->beta2 + t->beta3 == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("identity motion maps the vertex to itself") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec2 f1 = random_point(rng, 0, 50);
    const Vec2 f2 = random_point(rng, 0, 50);
    const Vec2 f3 = random_point(rng, 0, 50);
    const Vec2 v = random_point(rng, 0, 50);
    const auto t = solve_barycentric(f1, f2, f3, v);
    if (!t) continue;
    const Vec2 mapped = map_vertex(*t, f1, f2, f3);
    CHECK(mapped.x == doctest::Approx(v.x).epsilon(1e-9));
    CHECK(mapped.y == doctest::Approx(v.y).epsilon(1e-9));
  }
}

TEST_CASE("translation of all features translates the vertex") {
  const Vec2 f1{0, 0}, f2{8, 1}, f3{2, 9}, v{3, 3}, shift{5, -2};
  const auto t = solve_barycentric(f1, f2, f3, v);
  REQUIRE(t.has_value());
  const Vec2 mapped = map_vertex(*t, f1 + shift, f2 + shift, f3 + shift);
  CHECK(mapped.x == doctest::Approx(v.x + shift.x).epsilon(1e-12));
  CHECK(mapped.y == doctest::Approx(v.y + shift.y).epsilon(1e-12));
}

TEST_CASE("mapping is affine-equivariant") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 f1 = random_point(rng, 0, 40);
    const Vec2 f2 = random_point(rng, 0, 40);
    const Vec2 f3 = random_point(rng, 0, 40);
    if (triangle_area(f1, f2, f3) < 1.0) continue;
    const Vec2 v = random_point(rng, 0, 40);
    const auto t = solve_barycentric(f1, f2, f3, v);
    REQUIRE(t.has_value());
    const Affine m = random_affine(rng);
    const Vec2 mapped = map_vertex(*t, m.apply(f1), m.apply(f2), m.apply(f3));
    const Vec2 want = m.apply(v);
    CHECK(mapped.x == doctest::Approx(want.x).epsilon(1e-9));
    CHECK(mapped.y == doctest::Approx(want.y).epsilon(1e-9));
  }
}

namespace {

// Match set whose reference features sit on a grid and whose targets follow
// the given affine map of the reference positions.
FeatureMatchSet affine_matches(const Image& ref, const Affine& m, int frame, double step) {
  FeatureMatchSet set;
  set.target_frame = frame;
  int index = 0;
  for (double y = 2; y < ref.height() - 2; y += step)
    for (double x = 2; x < ref.width() - 2; x += step) {
      Feature fr, ft;
      fr.position = {x, y};
      ft.position = m.apply(fr.position);
      set.pairs.push_back({fr, ft, 0.0, index, index});
      ++index;
    }
  return set;
}

}  // namespace

TEST_CASE("self-matches label every interior vertex at its own position") {
  const Image img = procedural_texture(64, 64, 77);
  const Affine identity{1, 0, 0, 1, 0, 0};
  const FeatureMatchSet matches = affine_matches(img, identity, 1, 6.0);
  const TriangleMesh mesh = lattice_mesh(8, 8, 55, 55, 6, 6);
  const auto patches = label_anchor_patches(mesh, matches, img, img);
  CHECK(patches.size() == mesh.vertices.size());
  for (const AnchorPatch& p : patches) {
    CHECK(p.score == doctest::Approx(0.0));
    CHECK(p.position.x == doctest::Approx(mesh.vertices[p.vertex_id].x).epsilon(1e-9));
    CHECK(p.position.y == doctest::Approx(mesh.vertices[p.vertex_id].y).epsilon(1e-9));
  }
}

TEST_CASE("no matches gives no patches") {
  const Image img = procedural_texture(64, 64, 78);
  FeatureMatchSet empty;
  empty.target_frame = 2;
  const TriangleMesh mesh = lattice_mesh(8, 8, 55, 55, 4, 4);
  CHECK(label_anchor_patches(mesh, empty, img, img).empty());
}

TEST_CASE("patches follow an exact affine deformation of the scene") {
  // Warp the texture by a gentle affine map; features correspond exactly, so
  // mapped vertices land on the true warped positions and pass eta.
  const Image ref = procedural_texture(96, 96, 79);
  const Affine m{1.02, 0.03, -0.02, 0.98, 1.5, -1.0};
  // Build the target image so that target(m(p)) = ref(p), i.e. sample the
  // inverse map.
  const double det = m.a * m.d - m.b * m.c;
  Image tgt(96, 96);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) {
      const double rx = x - m.tx, ry = y - m.ty;
      const double sx = (m.d * rx - m.b * ry) / det;
      const double sy = (-m.c * rx + m.a * ry) / det;
      tgt.at(x, y) = float(ref.sample(sx, sy));
    }
  const FeatureMatchSet matches = affine_matches(ref, m, 1, 5.0);
  const TriangleMesh mesh = lattice_mesh(20, 20, 75, 75, 5, 5);
  PatchParams params;
  params.eta = 0.05;
  const auto patches = label_anchor_patches(mesh, matches, ref, tgt, params);
  CHECK(patches.size() == mesh.vertices.size());
  for (const AnchorPatch& p : patches) {
    const Vec2 want = m.apply(mesh.vertices[p.vertex_id]);
    CHECK(p.position.x == doctest::Approx(want.x).epsilon(1e-6));
    CHECK(p.position.y == doctest::Approx(want.y).epsilon(1e-6));
    CHECK(p.score < params.eta);
  }
}

TEST_CASE("emitted patches always satisfy the eta bound and uniqueness") {
  const Image ref = procedural_texture(80, 80, 80);
  const Image tgt = procedural_texture(80, 80, 81);  // unrelated texture
  Rng rng(82);
  FeatureMatchSet matches;
  matches.target_frame = 3;
  for (int i = 0; i < 60; ++i) {
    Feature fr, ft;
    fr.position = {rng.uniform(3, 77), rng.uniform(3, 77)};
    ft.position = fr.position + Vec2{rng.uniform(-4, 4), rng.uniform(-4, 4)};
    matches.pairs.push_back({fr, ft, 0.0, i, i});
  }
  const TriangleMesh mesh = lattice_mesh(10, 10, 70, 70, 7, 7);
  PatchParams params;
  params.eta = 0.15;
  const auto patches = label_anchor_patches(mesh, matches, ref, tgt, params);
  std::vector<int> seen(mesh.vertices.size(), 0);
  for (const AnchorPatch& p : patches) {
    CHECK(p.score < params.eta);
    CHECK(error_score(ref, tgt, mesh.vertices[p.vertex_id],
                      p.position - mesh.vertices[p.vertex_id]) ==
          doctest::Approx(p.score).epsilon(1e-12));
    seen[p.vertex_id] += 1;
  }
  for (int count : seen) CHECK(count <= 1);
}
