// Times the OpenMP kernels against their serial reference implementations
// and confirms the outputs stay bit-identical. Usage: t4d_bench [threads]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <omp.h>

#include "t4d/geometry.hpp"
#include "t4d/motion.hpp"
#include "t4d/motion_codec.hpp"
#include "t4d/render.hpp"
#include "t4d/rng.hpp"

using namespace t4d;
using Clock = std::chrono::steady_clock;

namespace {

double time_once(const char* label, double serial_s, double parallel_s, bool identical) {
  std::printf("%-28s %9.3f ms %9.3f ms %7.2fx   %s\n", label, serial_s * 1e3, parallel_s * 1e3,
              serial_s / parallel_s, identical ? "bit-identical" : "MISMATCH");
  return parallel_s;
}

template <typename F>
double timed(F&& fn) {
  auto start = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

PointCloudSequence build_scene(int frames, int height, int width, const CameraIntrinsics& k) {
  PointCloudSequence pcs = PointCloudSequence::make(frames, height * width);
  pcs.grid_height = height;
  pcs.grid_width = width;
  Rng rng(7);
  for (float& v : pcs.colors) v = static_cast<float>(rng.uniform());
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      int n = r * width + c;
      double d = 2.0 + 0.4 * std::sin(0.31 * r) * std::cos(0.17 * c);
      Vec3 p0 = backproject(c, r, d, k);
      for (int t = 0; t < frames; ++t) {
        double w = std::sin(2.0 * t / frames + 0.01 * n);
        pcs.set_position(t, n, p0 + Vec3{0.05 * w, -0.03 * w, 0.06 * w});
        pcs.set_visible(t, n, true);
      }
    }
  return pcs;
}

}  // namespace

int main(int argc, char** argv) {
  int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  const int W = 512, H = 368, T = 49;
  CameraIntrinsics k(0.9 * W, 0.9 * W, (W - 1) * 0.5, (H - 1) * 0.5, W, H);

  std::printf("grid %dx%d, %d frames, %d worker threads\n\n", W, H, T, threads);
  std::printf("%-28s %12s %12s %9s\n", "kernel", "serial", "parallel", "speedup");

  PointCloudSequence pcs = build_scene(T, H, W, k);

  {
    RenderConfig serial_cfg;
    serial_cfg.threads = 1;
    RenderConfig par_cfg;
    par_cfg.threads = threads;
    FrameRender a, b;
    double s = timed([&] { a = ref::splat_frame(pcs, 0, k, CameraPose::identity(), serial_cfg); });
    double p = timed([&] { b = splat_frame(pcs, 0, k, CameraPose::identity(), par_cfg); });
    time_once("splat_frame (1 frame)", s, p, a.rgb == b.rgb && a.depth == b.depth);

    TrajectorySpec spec;
    spec.kind = TrajectorySpec::Kind::Orbit;
    spec.frames = T;
    spec.angle_deg = 40.0;
    spec.center = Vec3{0.0, 0.0, 2.0};
    CameraTrajectory traj = make_trajectory(spec, k);
    FrameSequence fa, fb;
    VoidMask ma, mb;
    double ss = timed([&] { std::tie(fa, ma) = render_sequence(pcs, traj, k, serial_cfg); });
    double pp = timed([&] { std::tie(fb, mb) = render_sequence(pcs, traj, k, par_cfg); });
    time_once("render_sequence (49 fr)", ss, pp, fa.rgb == fb.rgb && ma.value == mb.value);
  }

  {
    MotionTensor m = relative_motion(pcs);
    DepthMap z0(H, W);
    Rng rng(9);
    for (float& v : z0.depth) v = static_cast<float>(rng.uniform(0.5, 5.0));

    NormalizedMotion a, b;
    double s = timed([&] { a = ref::normalize_motion(m, z0, k); });
    double p = timed([&] { b = normalize_motion(m, z0, k); });
    time_once("normalize_motion", s, p, a.ndelta == b.ndelta);

    MotionTensor da, db;
    double sd = timed([&] { da = ref::denormalize_motion(a, z0, k); });
    double pd = timed([&] { db = denormalize_motion(b, z0, k); });
    time_once("denormalize_motion", sd, pd, da.delta == db.delta);

    MotionMap ea, eb;
    double se = timed([&] { ea = ref::encode_motion_map(a); });
    double pe = timed([&] { eb = encode_motion_map(b); });
    time_once("encode_motion_map", se, pe, ea.codes == eb.codes);

    NormalizedMotion dda, ddb;
    double sdd = timed([&] { dda = ref::decode_motion_map(ea); });
    double pdd = timed([&] { ddb = decode_motion_map(eb); });
    time_once("decode_motion_map", sdd, pdd, dda.ndelta == ddb.ndelta);
  }

  return 0;
}
