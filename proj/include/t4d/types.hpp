#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "t4d/error.hpp"

namespace t4d {

// Camera space is right-handed: x right, y down, z forward into the scene,
// matching pixel coordinates (u right, v down). Positions, translations and
// depths are in meters; image-plane quantities in pixels.

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const;
  bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }
  static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2);
  // Right-handed rotation about +y; a positive angle takes +x toward -z.
  static Mat3 rotation_y(double radians);

  double at(int r, int c) const { return m[static_cast<size_t>(r) * 3 + c]; }
  double& at(int r, int c) { return m[static_cast<size_t>(r) * 3 + c]; }
  Vec3 row(int r) const { return {at(r, 0), at(r, 1), at(r, 2)}; }

  Vec3 operator*(const Vec3& v) const;
  Mat3 operator*(const Mat3& o) const;
  Mat3 transposed() const;
  double det() const;
};

struct CameraIntrinsics {
  double fx = 1.0, fy = 1.0;  // focal lengths, pixels
  double cx = 0.0, cy = 0.0;  // principal point, pixels
  int width = 1, height = 1;  // image dimensions, pixels

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx, double fy, double cx, double cy, int width, int height);

  // Frustum scaling factors: z/alpha_x is the frustum width at depth z.
  double alpha_x() const { return fx / width; }
  double alpha_y() const { return fy / height; }

  // Proportionally rescaled intrinsics for a different output resolution.
  CameraIntrinsics scaled_to(int new_width, int new_height) const;
};

// World -> camera rigid transform: p_cam = rotation * p_world + translation.
struct CameraPose {
  Mat3 rotation = Mat3::identity();
  Vec3 translation{};

  static CameraPose identity() { return {}; }
  // Validates orthonormality and det = +1 within 1e-9.
  static CameraPose make(const Mat3& rotation, const Vec3& translation);
  bool is_rigid(double tol = 1e-9) const;
};

// One per-pixel track record. Depth uses kInvalidDepth as the invalid
// sentinel; use valid_depth() rather than reading d directly.
struct TrackSample {
  float u = 0.0f;        // pixels
  float v = 0.0f;        // pixels
  float d = -1.0f;       // meters, or the sentinel
  uint8_t occluded = 1;  // 1 = occluded in this frame
};

constexpr float kInvalidDepth = -1.0f;

inline std::optional<float> valid_depth(float d) {
  if (std::isfinite(d) && d > 0.0f) return d;
  return std::nullopt;
}

// Dense per-pixel, per-frame raw tracks anchored to frame-0 pixels:
// at t = 0, (u, v) = (col, row) for every pixel.
class TrackSet {
public:
  TrackSet(int frames, int height, int width);

  int frames() const { return frames_; }
  int height() const { return height_; }
  int width() const { return width_; }
  size_t sample_count() const { return samples_.size(); }

  TrackSample& at(int t, int row, int col) { return samples_[index(t, row, col)]; }
  const TrackSample& at(int t, int row, int col) const { return samples_[index(t, row, col)]; }

  std::optional<float> depth_at(int t, int row, int col) const {
    return valid_depth(at(t, row, col).d);
  }

  std::vector<TrackSample>& samples() { return samples_; }
  const std::vector<TrackSample>& samples() const { return samples_; }

  size_t index(int t, int row, int col) const {
    return (static_cast<size_t>(t) * height_ + row) * width_ + col;
  }

  bool operator==(const TrackSet& o) const;

private:
  int frames_ = 1, height_ = 1, width_ = 1;
  std::vector<TrackSample> samples_;
};

struct DepthMap {
  int height = 0, width = 0;
  std::vector<float> depth;  // height*width, kInvalidDepth where invalid

  DepthMap() = default;
  DepthMap(int height, int width);

  std::optional<float> at(int row, int col) const {
    return valid_depth(depth[static_cast<size_t>(row) * width + col]);
  }
  float& raw(int row, int col) { return depth[static_cast<size_t>(row) * width + col]; }
};

struct ColorGrid {
  int height = 0, width = 0;
  std::vector<float> rgb;  // height*width*3, channels in [0, 1]

  ColorGrid() = default;
  ColorGrid(int height, int width, float fill = 0.5f);

  float* pixel(int row, int col) { return &rgb[(static_cast<size_t>(row) * width + col) * 3]; }
  const float* pixel(int row, int col) const {
    return &rgb[(static_cast<size_t>(row) * width + col) * 3];
  }
};

// Camera-space point positions over time plus per-point color and per-frame
// visibility. grid_height/grid_width are nonzero when points are anchored to
// a pixel grid (point n = row * grid_width + col).
struct PointCloudSequence {
  int frames = 0;
  int point_count = 0;
  int grid_height = 0, grid_width = 0;
  std::vector<double> positions;    // frames*point_count*3
  std::vector<float> colors;        // point_count*3
  std::vector<uint8_t> visibility;  // frames*point_count

  static PointCloudSequence make(int frames, int point_count);

  bool grid_anchored() const {
    return grid_height > 0 && grid_width > 0 &&
           static_cast<size_t>(grid_height) * grid_width == static_cast<size_t>(point_count);
  }

  size_t pos_index(int t, int n) const {
    return (static_cast<size_t>(t) * point_count + n) * 3;
  }
  Vec3 position(int t, int n) const {
    size_t i = pos_index(t, n);
    return {positions[i], positions[i + 1], positions[i + 2]};
  }
  void set_position(int t, int n, const Vec3& p) {
    size_t i = pos_index(t, n);
    positions[i] = p.x;
    positions[i + 1] = p.y;
    positions[i + 2] = p.z;
  }
  bool visible(int t, int n) const {
    return visibility[static_cast<size_t>(t) * point_count + n] != 0;
  }
  void set_visible(int t, int n, bool v) {
    visibility[static_cast<size_t>(t) * point_count + n] = v ? 1 : 0;
  }
};

}  // namespace t4d
