#include "t4d/types.hpp"

#include <cstring>
#include <limits>

namespace t4d {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::BadMagic: return "bad_magic";
    case ErrorCode::UnsupportedVersion: return "unsupported_version";
    case ErrorCode::Truncated: return "truncated";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::IoFailure: return "io_failure";
    case ErrorCode::NonPositiveDepth: return "non_positive_depth";
    case ErrorCode::BehindCamera: return "behind_camera";
    case ErrorCode::DegenerateSpec: return "degenerate_spec";
    case ErrorCode::DegenerateRange: return "degenerate_range";
    case ErrorCode::ShapeMismatch: return "shape_mismatch";
    case ErrorCode::FrameCountMismatch: return "frame_count_mismatch";
    case ErrorCode::InsufficientData: return "insufficient_data";
    case ErrorCode::NonFiniteLoss: return "non_finite_loss";
  }
  return "unknown";
}

Vec3 Vec3::normalized() const {
  double n = norm();
  if (!(n > 0.0)) fail(ErrorCode::InvalidArgument, "cannot normalize a zero vector");
  return {x / n, y / n, z / n};
}

Mat3 Mat3::from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
  Mat3 r;
  r.m = {r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z};
  return r;
}

Mat3 Mat3::rotation_y(double radians) {
  double c = std::cos(radians);
  double s = std::sin(radians);
  Mat3 r;
  r.m = {c, 0, s, 0, 1, 0, -s, 0, c};
  return r;
}

Vec3 Mat3::operator*(const Vec3& v) const {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
          m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += at(i, k) * o.at(k, j);
      r.at(i, j) = acc;
    }
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.at(i, j) = at(j, i);
  return r;
}

double Mat3::det() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

CameraIntrinsics::CameraIntrinsics(double fx, double fy, double cx, double cy, int width,
                                   int height)
    : fx(fx), fy(fy), cx(cx), cy(cy), width(width), height(height) {
  if (!(fx > 0.0) || !(fy > 0.0)) fail(ErrorCode::InvalidArgument, "focal lengths must be > 0");
  if (width < 1 || height < 1) fail(ErrorCode::InvalidArgument, "image dimensions must be >= 1");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    fail(ErrorCode::InvalidArgument, "principal point must lie inside the image");
}

CameraIntrinsics CameraIntrinsics::scaled_to(int new_width, int new_height) const {
  double sx = static_cast<double>(new_width) / width;
  double sy = static_cast<double>(new_height) / height;
  return CameraIntrinsics(fx * sx, fy * sy, cx * sx, cy * sy, new_width, new_height);
}

bool CameraPose::is_rigid(double tol) const {
  Mat3 rtr = rotation.transposed() * rotation;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double expect = (i == j) ? 1.0 : 0.0;
      if (std::abs(rtr.at(i, j) - expect) > tol) return false;
    }
  return std::abs(rotation.det() - 1.0) <= tol && translation.is_finite();
}

CameraPose CameraPose::make(const Mat3& rotation, const Vec3& translation) {
  CameraPose p{rotation, translation};
  if (!p.is_rigid()) fail(ErrorCode::InvalidArgument, "rotation is not orthonormal with det 1");
  return p;
}

TrackSet::TrackSet(int frames, int height, int width)
    : frames_(frames), height_(height), width_(width) {
  if (frames < 1 || height < 1 || width < 1)
    fail(ErrorCode::InvalidArgument, "TrackSet dimensions must be >= 1");
  samples_.resize(static_cast<size_t>(frames) * height * width);
  // Anchor every frame to the frame-0 pixel grid; depth starts at the sentinel.
  for (int t = 0; t < frames; ++t)
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) {
        TrackSample& s = at(t, r, c);
        s.u = static_cast<float>(c);
        s.v = static_cast<float>(r);
        s.d = kInvalidDepth;
        s.occluded = 1;
      }
}

bool TrackSet::operator==(const TrackSet& o) const {
  if (frames_ != o.frames_ || height_ != o.height_ || width_ != o.width_) return false;
  for (size_t i = 0; i < samples_.size(); ++i) {
    const TrackSample& a = samples_[i];
    const TrackSample& b = o.samples_[i];
    // Bitwise comparison so NaN payloads and signed zeros count as differences.
    if (std::memcmp(&a.u, &b.u, sizeof(float)) != 0) return false;
    if (std::memcmp(&a.v, &b.v, sizeof(float)) != 0) return false;
    if (std::memcmp(&a.d, &b.d, sizeof(float)) != 0) return false;
    if (a.occluded != b.occluded) return false;
  }
  return true;
}

DepthMap::DepthMap(int height, int width) : height(height), width(width) {
  if (height < 1 || width < 1) fail(ErrorCode::InvalidArgument, "DepthMap dimensions must be >= 1");
  depth.assign(static_cast<size_t>(height) * width, kInvalidDepth);
}

ColorGrid::ColorGrid(int height, int width, float fill) : height(height), width(width) {
  if (height < 1 || width < 1)
    fail(ErrorCode::InvalidArgument, "ColorGrid dimensions must be >= 1");
  rgb.assign(static_cast<size_t>(height) * width * 3, fill);
}

PointCloudSequence PointCloudSequence::make(int frames, int point_count) {
  if (frames < 1 || point_count < 0)
    fail(ErrorCode::InvalidArgument, "PointCloudSequence needs frames >= 1");
  PointCloudSequence p;
  p.frames = frames;
  p.point_count = point_count;
  p.positions.assign(static_cast<size_t>(frames) * point_count * 3, 0.0);
  p.colors.assign(static_cast<size_t>(point_count) * 3, 0.0f);
  p.visibility.assign(static_cast<size_t>(frames) * point_count, 0);
  return p;
}

}  // namespace t4d
