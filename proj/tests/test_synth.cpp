#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "meshtrack/synth.hpp"

namespace fs = std::filesystem;
using namespace meshtrack;

namespace {

DeformationModel test_model(int w = 96, int h = 96, double amplitude = 5.0,
                            std::uint64_t seed = 11) {
  return DeformationModel::random(w, h, 16, 3, amplitude, 5, 5, seed);
}

}  // namespace

TEST_CASE("the model is the identity at t=0 and at every return interval") {
  const DeformationModel model = test_model();
  for (int y = 0; y < 96; y += 7)
    for (int x = 0; x < 96; x += 7) {
      const Vec2 p{double(x), double(y)};
      CHECK(model.displacement(p, 0.0).norm() < 1e-12);
      CHECK(model.displacement(p, 16.0).norm() < 1e-9);
      CHECK(model.displacement(p, 32.0).norm() < 1e-9);
      CHECK(model.displacement(p, 8.0).norm() > 0.0);
    }
}

TEST_CASE("inverse is the exact inverse of forward") {
  const DeformationModel model = test_model();
  for (int y = 8; y < 90; y += 11)
    for (int x = 8; x < 90; x += 11) {
      const Vec2 p{double(x), double(y)};
      const Vec2 q = model.inverse(p, 7.0);
      const Vec2 back = model.forward(q, 7.0);
      CHECK((back - p).norm() < 1e-8);
    }
}

TEST_CASE("jacobian determinant stays positive for moderate amplitudes") {
  const DeformationModel model = test_model();
  for (double t = 1; t < 16; t += 2.5)
    for (int y = 0; y < 96; y += 5)
      for (int x = 0; x < 96; x += 5)
        CHECK(model.jacobian_det({double(x), double(y)}, t) > 0.0);
}

TEST_CASE("generated sequence: frame 0 equals the texture and GT matches the model") {
  const Image tex = procedural_texture(96, 96, 5);
  const DeformationModel model = test_model();
  const SequenceArtifacts art = generate_sequence(tex, model, 20, 5, 5, 12.0, 2);

  REQUIRE(art.frames.size() == 20);
  REQUIRE(art.ground_truth.positions.size() == 20);
  CHECK(std::memcmp(art.frames[0].data().data(), tex.data().data(),
                    tex.data().size() * sizeof(float)) == 0);
  CHECK(art.mesh.vertices.size() == 25);
  CHECK(art.ground_truth.positions[0] == art.mesh.vertices);

  for (int t = 1; t < 20; ++t)
    for (std::size_t i = 0; i < art.mesh.vertices.size(); ++i) {
      const Vec2 want = model.forward(art.mesh.vertices[i], t);
      CHECK((art.ground_truth.positions[t][i] - want).norm() < 1e-9);
    }
}

TEST_CASE("zero-amplitude model produces a static sequence") {
  const Image tex = procedural_texture(64, 64, 6);
  const DeformationModel model = test_model(64, 64, 0.0, 7);
  const SequenceArtifacts art = generate_sequence(tex, model, 5, 4, 4, 8.0, 2);
  for (int t = 1; t < 5; ++t) {
    CHECK(std::memcmp(art.frames[t].data().data(), art.frames[0].data().data(),
                      tex.data().size() * sizeof(float)) == 0);
    CHECK(art.ground_truth.positions[t] == art.ground_truth.positions[0]);
  }
}

TEST_CASE("regeneration is bitwise identical") {
  const Image tex = procedural_texture(64, 64, 8);
  const DeformationModel model = test_model(64, 64, 4.0, 9);
  const SequenceArtifacts a = generate_sequence(tex, model, 8, 4, 4, 8.0, 2);
  const SequenceArtifacts b = generate_sequence(tex, model, 8, 4, 4, 8.0, 1);
  for (int t = 0; t < 8; ++t) {
    CHECK(std::memcmp(a.frames[t].data().data(), b.frames[t].data().data(),
                      a.frames[t].data().size() * sizeof(float)) == 0);
    CHECK(a.ground_truth.positions[t] == b.ground_truth.positions[t]);
  }
}

TEST_CASE("excessive amplitude triggers the fold-over error") {
  const Image tex = procedural_texture(64, 64, 10);
  const DeformationModel model = test_model(64, 64, 80.0, 11);
  CHECK_THROWS_WITH_AS(generate_sequence(tex, model, 6, 4, 4, 8.0, 1),
                       doctest::Contains("fold-over"), std::runtime_error);
}

TEST_CASE("texture smaller than the model frame is rejected") {
  const Image tex = procedural_texture(32, 32, 12);
  const DeformationModel model = test_model(64, 64, 3.0, 13);
  CHECK_THROWS_AS(generate_sequence(tex, model, 4, 4, 4, 8.0, 1), std::invalid_argument);
}

TEST_CASE("degradation mode none is bitwise identity") {
  const Image tex = procedural_texture(48, 48, 14);
  const std::vector<Image> frames{tex, tex, tex};
  DegradationSpec spec;
  spec.mode = DegradationSpec::Mode::None;
  const auto out = degrade(frames, spec, 123, 2);
  for (std::size_t t = 0; t < frames.size(); ++t)
    CHECK(std::memcmp(out[t].data().data(), frames[t].data().data(),
                      frames[t].data().size() * sizeof(float)) == 0);
}

TEST_CASE("zero-sigma gaussian degradation is the identity") {
  const Image tex = procedural_texture(48, 48, 15);
  const std::vector<Image> frames{tex, tex};
  DegradationSpec spec;
  spec.mode = DegradationSpec::Mode::Gaussian;
  spec.gaussian_sigma = 0.0;
  const auto out = degrade(frames, spec, 5, 1);
  CHECK(std::memcmp(out[0].data().data(), frames[0].data().data(),
                    frames[0].data().size() * sizeof(float)) == 0);
}

TEST_CASE("salt-and-pepper alters close to density * pixels") {
  Image mid(500, 500, 0.5f);
  const std::vector<Image> frames{mid, mid};
  DegradationSpec spec;
  spec.mode = DegradationSpec::Mode::SaltPepper;
  spec.sp_density = 0.05;
  const auto out = degrade(frames, spec, 99, 2);
  for (const Image& frame : out) {
    int altered = 0;
    for (float v : frame.data())
      if (v != 0.5f) ++altered;
    CHECK(altered > 12500 - 400);
    CHECK(altered < 12500 + 400);
    for (float v : frame.data()) CHECK((v == 0.0f || v == 1.0f || v == 0.5f));
  }
}

TEST_CASE("degradation is deterministic per seed and per frame") {
  const Image tex = procedural_texture(48, 48, 16);
  const std::vector<Image> frames{tex, tex, tex};
  DegradationSpec spec;
  spec.mode = DegradationSpec::Mode::Gaussian;
  const auto a = degrade(frames, spec, 7, 1);
  const auto b = degrade(frames, spec, 7, 3);
  const auto c = degrade(frames, spec, 8, 1);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    CHECK(std::memcmp(a[t].data().data(), b[t].data().data(),
                      a[t].data().size() * sizeof(float)) == 0);
  }
  CHECK(std::memcmp(a[0].data().data(), c[0].data().data(),
                    a[0].data().size() * sizeof(float)) != 0);
  // identical input frames get different noise (per-frame streams)
  CHECK(std::memcmp(a[0].data().data(), a[1].data().data(),
                    a[0].data().size() * sizeof(float)) != 0);
}

TEST_CASE("occlusion paints an opaque rectangle") {
  const Image tex = procedural_texture(64, 64, 17);
  const std::vector<Image> frames{tex, tex, tex, tex};
  DegradationSpec spec;
  spec.mode = DegradationSpec::Mode::Occlusion;
  spec.occluder_width = 16;
  spec.occluder_height = 16;
  const auto out = degrade(frames, spec, 1, 2);
  for (const Image& frame : out) {
    int painted = 0;
    for (float v : frame.data())
      if (v == float(spec.occluder_intensity)) ++painted;
    CHECK(painted >= 16 * 16);
  }
  // occluder moves between frames
  CHECK(std::memcmp(out[0].data().data(), out[2].data().data(),
                    out[0].data().size() * sizeof(float)) != 0);
}

TEST_CASE("ground truth csv round trips exactly") {
  const fs::path dir = fs::temp_directory_path() / "meshtrack_test_gt";
  fs::create_directories(dir);
  const std::string path = (dir / "gt_0000.csv").string();
  const std::vector<Vec2> points{{1.5, 2.25}, {0.1234567890123456, 99.99999999999}, {-3, 7}};
  write_ground_truth_csv(points, path);
  const auto back = read_ground_truth_csv(path);
  REQUIRE(back.size() == points.size());
  for (std::size_t i = 0; i < points.size(); ++i) CHECK(back[i] == points[i]);
  fs::remove_all(dir);
}
