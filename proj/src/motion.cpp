#include "t4d/motion.hpp"

#include <cmath>

namespace t4d {

MotionTensor MotionTensor::make(int frames, int height, int width) {
  if (frames < 1 || height < 1 || width < 1)
    fail(ErrorCode::InvalidArgument, "MotionTensor dimensions must be >= 1");
  MotionTensor m;
  m.frames = frames;
  m.height = height;
  m.width = width;
  m.delta.assign(static_cast<size_t>(frames) * height * width * 3, 0.0);
  m.validity.assign(static_cast<size_t>(height) * width, 1);
  return m;
}

NormalizedMotion NormalizedMotion::make(int frames, int height, int width) {
  if (frames < 1 || height < 1 || width < 1)
    fail(ErrorCode::InvalidArgument, "NormalizedMotion dimensions must be >= 1");
  NormalizedMotion nm;
  nm.frames = frames;
  nm.height = height;
  nm.width = width;
  nm.ndelta.assign(static_cast<size_t>(frames) * height * width * 3, 0.0);
  nm.validity.assign(static_cast<size_t>(height) * width, 1);
  return nm;
}

MotionTensor relative_motion(const PointCloudSequence& pcs) {
  if (!pcs.grid_anchored())
    fail(ErrorCode::ShapeMismatch, "relative motion needs grid-anchored points (N = H*W)");
  const int T = pcs.frames;
  const int H = pcs.grid_height;
  const int W = pcs.grid_width;
  MotionTensor m = MotionTensor::make(T, H, W);
  for (int n = 0; n < pcs.point_count; ++n) m.validity[n] = pcs.visible(0, n) ? 1 : 0;

  // Frame 0 stays exactly zero; later frames subtract the anchor position.
#pragma omp parallel for schedule(static)
  for (int t = 1; t < T; ++t) {
    for (int n = 0; n < pcs.point_count; ++n) {
      size_t src0 = pcs.pos_index(0, n);
      size_t srct = pcs.pos_index(t, n);
      size_t dst = static_cast<size_t>(t) * H * W * 3 + static_cast<size_t>(n) * 3;
      m.delta[dst] = pcs.positions[srct] - pcs.positions[src0];
      m.delta[dst + 1] = pcs.positions[srct + 1] - pcs.positions[src0 + 1];
      m.delta[dst + 2] = pcs.positions[srct + 2] - pcs.positions[src0 + 2];
    }
  }
  return m;
}

namespace detail {

struct NormScale {
  double sx, sy, sz;  // per-component multipliers
};

// Shared per-pixel body for normalize/denormalize: applies the multipliers to
// every frame of one pixel, or flags the pixel invalid when it moves without
// a usable depth.
template <bool Forward, typename In, typename Out>
inline void scale_pixel(const In& in, Out& out, int pixel_row, int pixel_col, double z,
                        bool has_z, double ax, double ay) {
  const int T = in.frames;
  const int W = in.width;
  const int H = in.height;
  const size_t plane = static_cast<size_t>(H) * W * 3;
  const size_t base = (static_cast<size_t>(pixel_row) * W + pixel_col) * 3;
  const std::vector<double>* src_ptr;
  std::vector<double>* dst_ptr;
  if constexpr (Forward) {
    src_ptr = &in.delta;
    dst_ptr = &out.ndelta;
  } else {
    src_ptr = &in.ndelta;
    dst_ptr = &out.delta;
  }
  const std::vector<double>& src = *src_ptr;
  std::vector<double>& dst = *dst_ptr;

  if (!has_z) {
    bool moving = false;
    for (int t = 0; t < T && !moving; ++t) {
      size_t i = static_cast<size_t>(t) * plane + base;
      moving = src[i] != 0.0 || src[i + 1] != 0.0 || src[i + 2] != 0.0;
    }
    if (moving) out.validity[static_cast<size_t>(pixel_row) * W + pixel_col] = 0;
    return;  // outputs stay zero
  }

  double mx = Forward ? ax / z : z / ax;
  double my = Forward ? ay / z : z / ay;
  double mz = Forward ? 1.0 / z : z;
  for (int t = 0; t < T; ++t) {
    size_t i = static_cast<size_t>(t) * plane + base;
    dst[i] = src[i] * mx;
    dst[i + 1] = src[i + 1] * my;
    dst[i + 2] = src[i + 2] * mz;
  }
}

template <bool Forward, typename In, typename Out>
Out run_scale(const In& in, const DepthMap& z0, const CameraIntrinsics& k, double min_depth,
              bool parallel) {
  if (z0.height != in.height || z0.width != in.width)
    fail(ErrorCode::ShapeMismatch, "depth map does not match the motion grid");
  Out out = Out::make(in.frames, in.height, in.width);
  out.validity = in.validity;
  const double ax = k.alpha_x();
  const double ay = k.alpha_y();

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int row = 0; row < in.height; ++row) {
      for (int col = 0; col < in.width; ++col) {
        auto z = z0.at(row, col);
        bool has_z = z.has_value() && *z >= min_depth;
        scale_pixel<Forward>(in, out, row, col, has_z ? *z : 0.0, has_z, ax, ay);
      }
    }
  } else {
    for (int row = 0; row < in.height; ++row) {
      for (int col = 0; col < in.width; ++col) {
        auto z = z0.at(row, col);
        bool has_z = z.has_value() && *z >= min_depth;
        scale_pixel<Forward>(in, out, row, col, has_z ? *z : 0.0, has_z, ax, ay);
      }
    }
  }
  return out;
}

}  // namespace detail

NormalizedMotion normalize_motion(const MotionTensor& m, const DepthMap& z0,
                                  const CameraIntrinsics& k, double min_depth) {
  return detail::run_scale<true, MotionTensor, NormalizedMotion>(m, z0, k, min_depth, true);
}

MotionTensor denormalize_motion(const NormalizedMotion& nm, const DepthMap& z0,
                                const CameraIntrinsics& k, double min_depth) {
  return detail::run_scale<false, NormalizedMotion, MotionTensor>(nm, z0, k, min_depth, true);
}

namespace ref {

NormalizedMotion normalize_motion(const MotionTensor& m, const DepthMap& z0,
                                  const CameraIntrinsics& k, double min_depth) {
  return detail::run_scale<true, MotionTensor, NormalizedMotion>(m, z0, k, min_depth, false);
}

MotionTensor denormalize_motion(const NormalizedMotion& nm, const DepthMap& z0,
                                const CameraIntrinsics& k, double min_depth) {
  return detail::run_scale<false, NormalizedMotion, MotionTensor>(nm, z0, k, min_depth, false);
}

}  // namespace ref

PointCloudSequence compose_scene(const PointCloudSequence& p0, const MotionTensor& m) {
  if (!p0.grid_anchored() || p0.grid_height != m.height || p0.grid_width != m.width)
    fail(ErrorCode::ShapeMismatch, "motion tensor does not match the point grid");
  PointCloudSequence out = PointCloudSequence::make(m.frames, p0.point_count);
  out.grid_height = p0.grid_height;
  out.grid_width = p0.grid_width;
  out.colors = p0.colors;

  const size_t plane = static_cast<size_t>(m.height) * m.width * 3;
#pragma omp parallel for schedule(static)
  for (int t = 0; t < m.frames; ++t) {
    for (int n = 0; n < p0.point_count; ++n) {
      size_t src0 = p0.pos_index(0, n);
      size_t d = static_cast<size_t>(t) * plane + static_cast<size_t>(n) * 3;
      size_t dst = out.pos_index(t, n);
      out.positions[dst] = p0.positions[src0] + m.delta[d];
      out.positions[dst + 1] = p0.positions[src0 + 1] + m.delta[d + 1];
      out.positions[dst + 2] = p0.positions[src0 + 2] + m.delta[d + 2];
      out.set_visible(t, n, p0.visible(0, n) && m.validity[n] != 0);
    }
  }
  return out;
}

}  // namespace t4d
