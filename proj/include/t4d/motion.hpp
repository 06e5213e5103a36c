#pragma once

#include "t4d/types.hpp"

namespace t4d {

// Per-pixel displacements relative to frame 0. Frame-0 entries are exactly
// zero; validity marks per-pixel tracks that are usable at all.
struct MotionTensor {
  int frames = 0, height = 0, width = 0;
  std::vector<double> delta;      // frames*height*width*3
  std::vector<uint8_t> validity;  // height*width

  static MotionTensor make(int frames, int height, int width);

  size_t index(int t, int row, int col) const {
    return ((static_cast<size_t>(t) * height + row) * width + col) * 3;
  }
};

// Frustum-normalized, unitless displacements. For physically valid motion the
// depth component stays > -1 (a point cannot cross the camera plane).
struct NormalizedMotion {
  int frames = 0, height = 0, width = 0;
  std::vector<double> ndelta;     // frames*height*width*3
  std::vector<uint8_t> validity;  // height*width

  static NormalizedMotion make(int frames, int height, int width);

  size_t index(int t, int row, int col) const {
    return ((static_cast<size_t>(t) * height + row) * width + col) * 3;
  }
};

// Depths below this are treated as invalid for normalization.
constexpr double kMinNormalizationDepth = 1e-4;

// delta_t = position_t - position_0 per grid-anchored point. Tracks whose
// frame-0 point is invisible are flagged invalid in the validity channel.
MotionTensor relative_motion(const PointCloudSequence& pcs);

// Divides image-plane motion by the frustum size at the frame-0 depth:
// ndx = alpha_x*dx/z, ndy = alpha_y*dy/z, ndz = dz/z with alpha_x = fx/W,
// alpha_y = fy/H. Pixels that move but have no valid depth are flagged
// invalid; zero motion normalizes to zero regardless of depth.
NormalizedMotion normalize_motion(const MotionTensor& m, const DepthMap& z0,
                                  const CameraIntrinsics& k,
                                  double min_depth = kMinNormalizationDepth);

// Exact algebraic inverse of normalize_motion.
MotionTensor denormalize_motion(const NormalizedMotion& nm, const DepthMap& z0,
                                const CameraIntrinsics& k,
                                double min_depth = kMinNormalizationDepth);

// position_t = frame-0 position + delta_t; colors inherited, visibility is
// frame-0 visibility AND the motion validity channel.
PointCloudSequence compose_scene(const PointCloudSequence& p0, const MotionTensor& m);

namespace ref {
// Serial reference kernels, kept for testing the parallel paths bit-exactly
// and for the benchmark target.
NormalizedMotion normalize_motion(const MotionTensor& m, const DepthMap& z0,
                                  const CameraIntrinsics& k,
                                  double min_depth = kMinNormalizationDepth);
MotionTensor denormalize_motion(const NormalizedMotion& nm, const DepthMap& z0,
                                const CameraIntrinsics& k,
                                double min_depth = kMinNormalizationDepth);
}  // namespace ref

}  // namespace t4d
