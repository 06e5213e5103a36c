#pragma once

#include <optional>
#include <string>
#include <vector>

#include "t4d/types.hpp"

namespace t4d {

struct Projection {
  double u = 0.0, v = 0.0;  // pixels
  double depth = 0.0;       // meters (camera z)
};

// Standard pinhole inverse: (u, v, d) -> camera-space point. Throws on d <= 0.
Vec3 backproject(double u, double v, double d, const CameraIntrinsics& k);

// Pinhole projection; throws BehindCamera when p.z <= 0.
Projection project(const Vec3& p, const CameraIntrinsics& k);

// p_cam = rotation * p_world + translation.
Vec3 transform(const Vec3& p_world, const CameraPose& pose);

struct CameraTrajectory {
  std::vector<CameraPose> poses;
  int frame_count() const { return static_cast<int>(poses.size()); }
};

struct TrajectorySpec {
  enum class Kind { Orbit, Linear, Identity };

  Kind kind = Kind::Identity;
  int frames = 1;

  // Orbit: revolve about the vertical axis through `center`, camera aimed at
  // it, constant center distance. A positive angle moves the camera leftward
  // (toward -x initially) when leftward_positive is set.
  double angle_deg = 0.0;
  std::optional<Vec3> center;
  bool leftward_positive = true;

  // Linear: translate the camera by distance * i/(frames-1) along direction.
  // An unset distance defaults to 10% of the median scene depth when the
  // pipeline resolves the spec against data.
  Vec3 direction{0.0, 0.0, 1.0};
  std::optional<double> distance = 0.0;

  static TrajectorySpec parse_json(const std::string& text);
  std::string to_json() const;
};

// pose[0] is always the identity (source viewpoint). Throws DegenerateSpec
// for frames = 1 with nonzero angle/distance, and for an orbit center on the
// camera's vertical axis. Orbit specs require a resolved center.
CameraTrajectory make_trajectory(const TrajectorySpec& spec, const CameraIntrinsics& k);

// Camera aimed at target with y kept aligned to world down (+y).
CameraPose look_at(const Vec3& eye, const Vec3& target);

// Materializes camera-space positions from (u_t, v_t, d_t); point n = row*W+col.
// Visibility = depth valid and (not occluded, unless include_occluded).
// Invalid depths become invisible points at the origin.
PointCloudSequence tracks_to_pointclouds(const TrackSet& tracks, const ColorGrid& colors,
                                         const CameraIntrinsics& k,
                                         bool include_occluded = false);

// Frame-0 depth channel of a track set.
DepthMap frame0_depth(const TrackSet& tracks);

// Centroid of the back-projected valid frame-0 depths; default orbit center.
Vec3 scene_centroid(const TrackSet& tracks, const CameraIntrinsics& k);

// Median of valid frame-0 depths; used for default linear travel distances.
double median_scene_depth(const TrackSet& tracks);

// Positions multiplied by s; everything else copied.
PointCloudSequence uniformly_scaled(const PointCloudSequence& pcs, double s);

}  // namespace t4d
