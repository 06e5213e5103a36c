#pragma once

#include <array>
#include <utility>

#include "t4d/geometry.hpp"
#include "t4d/types.hpp"

namespace t4d {

struct RenderConfig {
  int width = 0, height = 0;  // output dims; 0 means "use the intrinsics' dims"
  int splat_radius = 1;       // pixels; 0 paints a single pixel
  std::array<float, 3> background{0.0f, 0.0f, 0.0f};
  double z_near = 1e-2;  // meters; points with z < z_near are skipped
  int threads = 0;       // 0 = library default; results never depend on it
};

struct FrameSequence {
  int frames = 0, height = 0, width = 0;
  std::vector<float> rgb;  // frames*height*width*3, channels in [0, 1]

  size_t pixel_index(int t, int y, int x) const {
    return ((static_cast<size_t>(t) * height + y) * width + x) * 3;
  }
};

// 1.0 where at least one point splatted, 0.5 where none did.
struct VoidMask {
  int frames = 0, height = 0, width = 0;
  std::vector<float> value;  // frames*height*width

  float at(int t, int y, int x) const {
    return value[(static_cast<size_t>(t) * height + y) * width + x];
  }
};

struct FrameRender {
  int height = 0, width = 0;
  std::vector<float> rgb;    // height*width*3
  std::vector<float> depth;  // height*width, +inf where empty
  std::vector<float> mask;   // height*width, 0.5 or 1.0
};

// Z-buffered point splatting. Every visible point is transformed by the pose,
// projected (with intrinsics rescaled to the output resolution) and painted
// over a disc of splat_radius pixels. The per-pixel winner is the candidate
// with the strictly smallest depth, ties broken by the lowest point index --
// a total order, so the result is identical for any worker count.
FrameRender splat_frame(const PointCloudSequence& pcs, int frame_index,
                        const CameraIntrinsics& k, const CameraPose& pose,
                        const RenderConfig& cfg);

// Renders frame t with trajectory pose t (or the single pose for a static
// camera). Frames render independently in parallel; bit-identical output for
// any cfg.threads.
std::pair<FrameSequence, VoidMask> render_sequence(const PointCloudSequence& pcs,
                                                   const CameraTrajectory& traj,
                                                   const CameraIntrinsics& k,
                                                   const RenderConfig& cfg);

namespace ref {
// Serial reference splatter; the parallel kernels must match it bit-exactly.
FrameRender splat_frame(const PointCloudSequence& pcs, int frame_index,
                        const CameraIntrinsics& k, const CameraPose& pose,
                        const RenderConfig& cfg);
}  // namespace ref

}  // namespace t4d
