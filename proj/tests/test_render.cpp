#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "t4d/image_io.hpp"
#include "t4d/render.hpp"
#include "synthetic.hpp"

using namespace t4d;

namespace {

PointCloudSequence single_point(const Vec3& p, float r, float g, float b) {
  PointCloudSequence pcs = PointCloudSequence::make(1, 1);
  pcs.set_position(0, 0, p);
  pcs.set_visible(0, 0, true);
  pcs.colors = {r, g, b};
  return pcs;
}

size_t covered_pixels(const VoidMask& mask, int t) {
  size_t n = 0;
  size_t npx = static_cast<size_t>(mask.height) * mask.width;
  for (size_t i = 0; i < npx; ++i)
    if (mask.value[static_cast<size_t>(t) * npx + i] == 1.0f) ++n;
  return n;
}

}  // namespace

TEST_CASE("empty point set renders background with an all-void mask") {
  CameraIntrinsics k = t4dtest::default_intrinsics(16, 12);
  PointCloudSequence pcs = PointCloudSequence::make(1, 0);
  RenderConfig cfg;
  cfg.background = {0.25f, 0.5f, 0.75f};
  FrameRender fr = splat_frame(pcs, 0, k, CameraPose::identity(), cfg);
  for (int i = 0; i < 16 * 12; ++i) {
    CHECK(fr.rgb[i * 3] == 0.25f);
    CHECK(fr.rgb[i * 3 + 1] == 0.5f);
    CHECK(fr.rgb[i * 3 + 2] == 0.75f);
    CHECK(fr.mask[i] == 0.5f);
    CHECK(std::isinf(fr.depth[i]));
  }
}

TEST_CASE("a single on-axis point with radius 0 paints one pixel at the principal point") {
  CameraIntrinsics k(100.0, 100.0, 8.0, 6.0, 16, 12);
  PointCloudSequence pcs = single_point({0.0, 0.0, 2.0}, 1.0f, 0.0f, 0.0f);
  RenderConfig cfg;
  cfg.splat_radius = 0;
  FrameRender fr = splat_frame(pcs, 0, k, CameraPose::identity(), cfg);

  int painted = 0;
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 16; ++x) {
      size_t i = static_cast<size_t>(y) * 16 + x;
      if (fr.mask[i] == 1.0f) {
        ++painted;
        CHECK(x == 8);
        CHECK(y == 6);
        CHECK(fr.rgb[i * 3] == 1.0f);
        CHECK(fr.rgb[i * 3 + 1] == 0.0f);
        CHECK(fr.depth[i] == 2.0f);
      } else {
        CHECK(fr.mask[i] == 0.5f);
      }
    }
  CHECK(painted == 1);
}

TEST_CASE("the z-test keeps the nearer of two coaxial points") {
  CameraIntrinsics k(100.0, 100.0, 8.0, 6.0, 16, 12);
  PointCloudSequence pcs = PointCloudSequence::make(1, 2);
  pcs.set_position(0, 0, {0.0, 0.0, 1.0});
  pcs.set_position(0, 1, {0.0, 0.0, 2.0});
  pcs.set_visible(0, 0, true);
  pcs.set_visible(0, 1, true);
  pcs.colors = {1.0f, 0.0f, 0.0f, 0.0f, 0.0f, 1.0f};  // red near, blue far
  RenderConfig cfg;
  cfg.splat_radius = 0;
  FrameRender fr = splat_frame(pcs, 0, k, CameraPose::identity(), cfg);
  size_t i = 6 * 16 + 8;
  CHECK(fr.rgb[i * 3] == 1.0f);
  CHECK(fr.rgb[i * 3 + 2] == 0.0f);

  // Exactly equal depths: the lower point index wins.
  pcs.set_position(0, 0, {0.0, 0.0, 2.0});
  fr = splat_frame(pcs, 0, k, CameraPose::identity(), cfg);
  CHECK(fr.rgb[i * 3] == 1.0f);
}

TEST_CASE("points behind z_near are skipped; invisible points never splat") {
  CameraIntrinsics k(100.0, 100.0, 8.0, 6.0, 16, 12);
  PointCloudSequence pcs = PointCloudSequence::make(1, 3);
  pcs.set_position(0, 0, {0.0, 0.0, 0.005});  // in front, but inside z_near
  pcs.set_position(0, 1, {0.0, 0.0, -1.0});   // behind the camera
  pcs.set_position(0, 2, {0.0, 0.0, 3.0});    // fine, but invisible
  pcs.set_visible(0, 0, true);
  pcs.set_visible(0, 1, true);
  pcs.set_visible(0, 2, false);
  pcs.colors.assign(9, 1.0f);
  FrameRender fr = splat_frame(pcs, 0, k, CameraPose::identity(), RenderConfig{});
  for (int i = 0; i < 16 * 12; ++i) CHECK(fr.mask[i] == 0.5f);
}

TEST_CASE("parallel splat matches the serial reference bit-exactly") {
  CameraIntrinsics k = t4dtest::default_intrinsics(48, 36);
  PointCloudSequence pcs = t4dtest::drifting_scene(3, 36, 48, k, 21);
  TrajectorySpec spec;
  spec.kind = TrajectorySpec::Kind::Orbit;
  spec.frames = 3;
  spec.angle_deg = 40.0;
  spec.center = Vec3{0.05, -0.1, 2.0};
  CameraTrajectory traj = make_trajectory(spec, k);

  for (int t = 0; t < 3; ++t) {
    for (int threads : {1, 3, 8}) {
      RenderConfig cfg;
      cfg.threads = threads;
      FrameRender par = splat_frame(pcs, t, k, traj.poses[t], cfg);
      FrameRender ser = ref::splat_frame(pcs, t, k, traj.poses[t], cfg);
      CHECK(par.rgb == ser.rgb);
      CHECK(par.depth == ser.depth);
      CHECK(par.mask == ser.mask);
    }
  }
}

TEST_CASE("render_sequence is deterministic across thread counts") {
  CameraIntrinsics k = t4dtest::default_intrinsics(40, 30);
  PointCloudSequence pcs = t4dtest::drifting_scene(5, 30, 40, k, 22);
  TrajectorySpec spec;
  spec.kind = TrajectorySpec::Kind::Linear;
  spec.frames = 5;
  spec.direction = Vec3{1.0, 0.0, 0.0};
  spec.distance = 0.2;
  CameraTrajectory traj = make_trajectory(spec, k);

  RenderConfig one;
  one.threads = 1;
  RenderConfig eight;
  eight.threads = 8;
  auto [fa, ma] = render_sequence(pcs, traj, k, one);
  auto [fb, mb] = render_sequence(pcs, traj, k, eight);
  CHECK(fa.rgb == fb.rgb);
  CHECK(ma.value == mb.value);
}

TEST_CASE("static scene with identity trajectory repeats the first frame") {
  CameraIntrinsics k = t4dtest::default_intrinsics(24, 18);
  PointCloudSequence pcs = t4dtest::drifting_scene(1, 18, 24, k, 23);
  PointCloudSequence rep = PointCloudSequence::make(4, pcs.point_count);
  rep.grid_height = pcs.grid_height;
  rep.grid_width = pcs.grid_width;
  rep.colors = pcs.colors;
  for (int t = 0; t < 4; ++t)
    for (int n = 0; n < pcs.point_count; ++n) {
      rep.set_position(t, n, pcs.position(0, n));
      rep.set_visible(t, n, pcs.visible(0, n));
    }
  TrajectorySpec spec;
  spec.kind = TrajectorySpec::Kind::Identity;
  spec.frames = 4;
  auto [frames, mask] = render_sequence(rep, make_trajectory(spec, k), k, RenderConfig{});
  size_t npx = static_cast<size_t>(18) * 24;
  for (int t = 1; t < 4; ++t)
    for (size_t i = 0; i < npx * 3; ++i)
      CHECK(frames.rgb[static_cast<size_t>(t) * npx * 3 + i] == frames.rgb[i]);
}

TEST_CASE("a static camera pose renders a whole moving sequence") {
  CameraIntrinsics k = t4dtest::default_intrinsics(24, 18);
  PointCloudSequence pcs = t4dtest::drifting_scene(4, 18, 24, k, 29);
  CameraTrajectory static_cam;
  static_cam.poses.push_back(CameraPose::identity());
  auto [frames, mask] = render_sequence(pcs, static_cam, k, RenderConfig{});
  CHECK(frames.frames == 4);

  CameraTrajectory wrong;
  wrong.poses.assign(3, CameraPose::identity());
  CHECK_THROWS_AS(render_sequence(pcs, wrong, k, RenderConfig{}), Error);
}

TEST_CASE("orbit coverage never grows as the camera leaves the observed frustum") {
  CameraIntrinsics k = t4dtest::default_intrinsics(32, 24);
  // Static frontal plane at depth 2, observed fully from the source camera.
  PointCloudSequence pcs = PointCloudSequence::make(6, 24 * 32);
  pcs.grid_height = 24;
  pcs.grid_width = 32;
  pcs.colors.assign(pcs.colors.size(), 0.5f);
  for (int t = 0; t < 6; ++t)
    for (int r = 0; r < 24; ++r)
      for (int c = 0; c < 32; ++c) {
        int n = r * 32 + c;
        pcs.set_position(t, n, backproject(c, r, 2.0, k));
        pcs.set_visible(t, n, true);
      }
  TrajectorySpec spec;
  spec.kind = TrajectorySpec::Kind::Orbit;
  spec.frames = 6;
  spec.angle_deg = 90.0;
  spec.center = Vec3{0.0, 0.0, 2.0};
  auto [frames, mask] = render_sequence(pcs, make_trajectory(spec, k), k, RenderConfig{});
  size_t prev = covered_pixels(mask, 0);
  for (int t = 1; t < 6; ++t) {
    size_t cur = covered_pixels(mask, t);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("uniform scaling leaves the source-pose render unchanged") {
  CameraIntrinsics k = t4dtest::default_intrinsics(32, 24);
  PointCloudSequence pcs = t4dtest::drifting_scene(2, 24, 32, k, 25);
  PointCloudSequence doubled = uniformly_scaled(pcs, 2.0);
  CameraTrajectory ident;
  ident.poses.push_back(CameraPose::identity());
  auto [fa, ma] = render_sequence(pcs, ident, k, RenderConfig{});
  auto [fb, mb] = render_sequence(doubled, ident, k, RenderConfig{});
  CHECK(fa.rgb == fb.rgb);
  CHECK(ma.value == mb.value);
}

TEST_CASE("output resolution rescales the intrinsics proportionally") {
  CameraIntrinsics k(100.0, 100.0, 8.0, 6.0, 16, 12);
  PointCloudSequence pcs = single_point({0.0, 0.0, 2.0}, 0.0f, 1.0f, 0.0f);
  RenderConfig cfg;
  cfg.width = 32;
  cfg.height = 24;
  cfg.splat_radius = 0;
  FrameRender fr = splat_frame(pcs, 0, k, CameraPose::identity(), cfg);
  CHECK(fr.width == 32);
  CHECK(fr.height == 24);
  size_t i = static_cast<size_t>(12) * 32 + 16;  // principal point scales with the image
  CHECK(fr.mask[i] == 1.0f);
  CHECK(fr.rgb[i * 3 + 1] == 1.0f);
}

TEST_CASE("invalid render configs are rejected up front") {
  CameraIntrinsics k = t4dtest::default_intrinsics(8, 8);
  PointCloudSequence pcs = t4dtest::drifting_scene(1, 8, 8, k, 26);

  RenderConfig bad_near;
  bad_near.z_near = 0.0;
  CHECK_THROWS_AS(splat_frame(pcs, 0, k, CameraPose::identity(), bad_near), Error);

  RenderConfig bad_radius;
  bad_radius.splat_radius = -1;
  CHECK_THROWS_AS(splat_frame(pcs, 0, k, CameraPose::identity(), bad_radius), Error);

  CHECK_THROWS_AS(splat_frame(pcs, 5, k, CameraPose::identity(), RenderConfig{}), Error);
  CHECK_THROWS_AS(uniformly_scaled(pcs, 0.0), Error);
  CHECK_THROWS_AS(uniformly_scaled(pcs, -2.0), Error);
}

TEST_CASE("ppm and pgm writers emit the stated byte mappings") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "t4d_render_tests";
  fs::create_directories(dir);

  std::vector<float> rgb = {0.0f, 0.5f, 1.0f, 0.25f, 2.0f, -1.0f};
  write_ppm(dir / "two.ppm", 2, 1, rgb);
  std::ifstream in(dir / "two.ppm", std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header == "P6");
  std::getline(in, header);
  CHECK(header == "2 1");
  std::getline(in, header);
  CHECK(header == "255");
  unsigned char bytes[6];
  in.read(reinterpret_cast<char*>(bytes), 6);
  CHECK(bytes[0] == 0);
  CHECK(bytes[1] == 128);  // 0.5 maps to 128
  CHECK(bytes[2] == 255);
  CHECK(bytes[3] == 64);
  CHECK(bytes[4] == 255);  // clamped
  CHECK(bytes[5] == 0);    // clamped

  std::vector<float> mask = {0.5f, 1.0f};
  write_pgm(dir / "mask.pgm", 2, 1, mask);
  std::ifstream pin(dir / "mask.pgm", std::ios::binary);
  std::getline(pin, header);
  CHECK(header == "P5");
  std::getline(pin, header);
  std::getline(pin, header);
  unsigned char mbytes[2];
  pin.read(reinterpret_cast<char*>(mbytes), 2);
  CHECK(mbytes[0] == 128);
  CHECK(mbytes[1] == 255);

  write_binary_mask_pgm(dir / "maskbin.pgm", 2, 1, mask);
  std::ifstream bin(dir / "maskbin.pgm", std::ios::binary);
  std::getline(bin, header);
  std::getline(bin, header);
  std::getline(bin, header);
  bin.read(reinterpret_cast<char*>(mbytes), 2);
  CHECK(mbytes[0] == 0);
  CHECK(mbytes[1] == 255);
}
