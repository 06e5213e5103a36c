#include "t4d/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

namespace t4d {

namespace {

struct Winner {
  double depth = std::numeric_limits<double>::infinity();
  uint32_t index = UINT32_MAX;
};

inline bool beats(double depth, uint32_t index, const Winner& w) {
  return depth < w.depth || (depth == w.depth && index < w.index);
}

struct ResolvedConfig {
  int width, height;
  CameraIntrinsics k;  // rescaled to the output resolution
  int radius;
  double z_near;
  std::array<float, 3> background;
};

ResolvedConfig resolve(const RenderConfig& cfg, const CameraIntrinsics& k) {
  ResolvedConfig r;
  r.width = cfg.width > 0 ? cfg.width : k.width;
  r.height = cfg.height > 0 ? cfg.height : k.height;
  if (r.width < 1 || r.height < 1)
    fail(ErrorCode::InvalidArgument, "render dimensions must be >= 1");
  if (cfg.splat_radius < 0) fail(ErrorCode::InvalidArgument, "splat radius must be >= 0");
  if (!(cfg.z_near > 0.0)) fail(ErrorCode::InvalidArgument, "z_near must be > 0");
  r.k = (r.width == k.width && r.height == k.height) ? k : k.scaled_to(r.width, r.height);
  r.radius = cfg.splat_radius;
  r.z_near = cfg.z_near;
  r.background = cfg.background;
  return r;
}

// Splats points [begin, end) of frame `t` into the winner buffer. Candidate
// generation is shared between the serial reference and the parallel path.
void splat_range(const PointCloudSequence& pcs, int t, const ResolvedConfig& rc,
                 const CameraPose& pose, uint32_t begin, uint32_t end,
                 std::vector<Winner>& buf) {
  const int W = rc.width;
  const int H = rc.height;
  const int r = rc.radius;
  const int r2 = r * r;
  for (uint32_t n = begin; n < end; ++n) {
    if (!pcs.visible(t, static_cast<int>(n))) continue;
    Vec3 p = pose.rotation * pcs.position(t, static_cast<int>(n)) + pose.translation;
    if (!(p.z >= rc.z_near)) continue;  // also rejects NaN
    double inv_z = 1.0 / p.z;
    double u = rc.k.fx * p.x * inv_z + rc.k.cx;
    double v = rc.k.fy * p.y * inv_z + rc.k.cy;
    if (!(std::abs(u) < 1e9 && std::abs(v) < 1e9)) continue;
    int ci = static_cast<int>(std::lround(u));
    int cj = static_cast<int>(std::lround(v));
    if (ci + r < 0 || ci - r >= W || cj + r < 0 || cj - r >= H) continue;
    for (int dj = -r; dj <= r; ++dj) {
      int y = cj + dj;
      if (y < 0 || y >= H) continue;
      for (int di = -r; di <= r; ++di) {
        if (di * di + dj * dj > r2) continue;
        int x = ci + di;
        if (x < 0 || x >= W) continue;
        Winner& w = buf[static_cast<size_t>(y) * W + x];
        if (beats(p.z, n, w)) w = Winner{p.z, n};
      }
    }
  }
}

FrameRender paint(const PointCloudSequence& pcs, const ResolvedConfig& rc,
                  const std::vector<Winner>& buf) {
  FrameRender out;
  out.width = rc.width;
  out.height = rc.height;
  size_t npx = static_cast<size_t>(rc.width) * rc.height;
  out.rgb.resize(npx * 3);
  out.depth.resize(npx);
  out.mask.resize(npx);
  for (size_t i = 0; i < npx; ++i) {
    const Winner& w = buf[i];
    if (w.index != UINT32_MAX) {
      const float* c = &pcs.colors[static_cast<size_t>(w.index) * 3];
      out.rgb[i * 3] = c[0];
      out.rgb[i * 3 + 1] = c[1];
      out.rgb[i * 3 + 2] = c[2];
      out.depth[i] = static_cast<float>(w.depth);
      out.mask[i] = 1.0f;
    } else {
      out.rgb[i * 3] = rc.background[0];
      out.rgb[i * 3 + 1] = rc.background[1];
      out.rgb[i * 3 + 2] = rc.background[2];
      out.depth[i] = std::numeric_limits<float>::infinity();
      out.mask[i] = 0.5f;
    }
  }
  return out;
}

int resolve_threads(int requested) {
  return requested > 0 ? requested : omp_get_max_threads();
}

}  // namespace

namespace ref {

FrameRender splat_frame(const PointCloudSequence& pcs, int frame_index,
                        const CameraIntrinsics& k, const CameraPose& pose,
                        const RenderConfig& cfg) {
  if (frame_index < 0 || frame_index >= pcs.frames)
    fail(ErrorCode::InvalidArgument, "frame index out of range");
  ResolvedConfig rc = resolve(cfg, k);
  std::vector<Winner> buf(static_cast<size_t>(rc.width) * rc.height);
  splat_range(pcs, frame_index, rc, pose, 0, static_cast<uint32_t>(pcs.point_count), buf);
  return paint(pcs, rc, buf);
}

}  // namespace ref

FrameRender splat_frame(const PointCloudSequence& pcs, int frame_index,
                        const CameraIntrinsics& k, const CameraPose& pose,
                        const RenderConfig& cfg) {
  if (frame_index < 0 || frame_index >= pcs.frames)
    fail(ErrorCode::InvalidArgument, "frame index out of range");
  ResolvedConfig rc = resolve(cfg, k);
  const size_t npx = static_cast<size_t>(rc.width) * rc.height;
  const uint32_t count = static_cast<uint32_t>(pcs.point_count);
  int nthreads = resolve_threads(cfg.threads);

  // Each thread reduces its share of points into a private buffer; the
  // per-pixel winner is a lexicographic (depth, index) minimum, so merging is
  // order-independent and the output never depends on the thread count.
  std::vector<std::vector<Winner>> partial(nthreads);
#pragma omp parallel num_threads(nthreads)
  {
    int tid = omp_get_thread_num();
    partial[tid].assign(npx, Winner{});
#pragma omp for schedule(static)
    for (int64_t chunk = 0; chunk < static_cast<int64_t>(nthreads); ++chunk) {
      uint32_t begin = static_cast<uint32_t>(chunk * count / nthreads);
      uint32_t end = static_cast<uint32_t>((chunk + 1) * count / nthreads);
      splat_range(pcs, frame_index, rc, pose, begin, end, partial[tid]);
    }
  }
  // The runtime may grant fewer threads than requested; unused buffers stay
  // empty and are skipped.
  if (partial[0].empty()) partial[0].assign(npx, Winner{});
  std::vector<Winner>& merged = partial[0];
  for (int tidx = 1; tidx < nthreads; ++tidx) {
    const std::vector<Winner>& other = partial[tidx];
    if (other.size() != npx) continue;
    for (size_t i = 0; i < npx; ++i)
      if (beats(other[i].depth, other[i].index, merged[i])) merged[i] = other[i];
  }
  return paint(pcs, rc, merged);
}

std::pair<FrameSequence, VoidMask> render_sequence(const PointCloudSequence& pcs,
                                                   const CameraTrajectory& traj,
                                                   const CameraIntrinsics& k,
                                                   const RenderConfig& cfg) {
  if (traj.frame_count() != pcs.frames && traj.frame_count() != 1)
    fail(ErrorCode::FrameCountMismatch,
         "trajectory must have one pose per frame or a single static pose");
  ResolvedConfig rc = resolve(cfg, k);  // validate once, outside the parallel region

  FrameSequence seq;
  seq.frames = pcs.frames;
  seq.height = rc.height;
  seq.width = rc.width;
  seq.rgb.resize(static_cast<size_t>(pcs.frames) * rc.height * rc.width * 3);
  VoidMask mask;
  mask.frames = pcs.frames;
  mask.height = rc.height;
  mask.width = rc.width;
  mask.value.resize(static_cast<size_t>(pcs.frames) * rc.height * rc.width);

  const size_t npx = static_cast<size_t>(rc.height) * rc.width;
  int nthreads = resolve_threads(cfg.threads);
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
  for (int t = 0; t < pcs.frames; ++t) {
    const CameraPose& pose = traj.poses[traj.frame_count() == 1 ? 0 : t];
    FrameRender fr = ref::splat_frame(pcs, t, k, pose, cfg);
    std::copy(fr.rgb.begin(), fr.rgb.end(), seq.rgb.begin() + static_cast<size_t>(t) * npx * 3);
    std::copy(fr.mask.begin(), fr.mask.end(), mask.value.begin() + static_cast<size_t>(t) * npx);
  }
  return {std::move(seq), std::move(mask)};
}

}  // namespace t4d
