#include "t4d/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace t4d {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Vec3 backproject(double u, double v, double d, const CameraIntrinsics& k) {
  if (!(d > 0.0)) fail(ErrorCode::NonPositiveDepth, "backproject requires depth > 0");
  return {(u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d};
}

Projection project(const Vec3& p, const CameraIntrinsics& k) {
  if (!(p.z > 0.0)) fail(ErrorCode::BehindCamera, "point is behind the camera plane");
  return {k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy, p.z};
}

Vec3 transform(const Vec3& p_world, const CameraPose& pose) {
  return pose.rotation * p_world + pose.translation;
}

CameraPose look_at(const Vec3& eye, const Vec3& target) {
  Vec3 forward = (target - eye).normalized();
  Vec3 world_down{0.0, 1.0, 0.0};
  Vec3 down = world_down - forward * world_down.dot(forward);
  if (down.norm() < 1e-9)
    fail(ErrorCode::DegenerateSpec, "view direction parallel to the vertical axis");
  Vec3 y_cam = down.normalized();
  Vec3 x_cam = y_cam.cross(forward);
  Mat3 rotation = Mat3::from_rows(x_cam, y_cam, forward);
  return CameraPose{rotation, -(rotation * eye)};
}

namespace {

void validate_spec(const TrajectorySpec& spec) {
  if (spec.frames < 1) fail(ErrorCode::InvalidArgument, "trajectory needs frames >= 1");
  switch (spec.kind) {
    case TrajectorySpec::Kind::Orbit:
      if (!std::isfinite(spec.angle_deg))
        fail(ErrorCode::InvalidArgument, "orbit angle must be finite");
      if (spec.frames == 1 && spec.angle_deg != 0.0)
        fail(ErrorCode::DegenerateSpec, "single-frame orbit with nonzero angle");
      if (!spec.center)
        fail(ErrorCode::InvalidArgument, "orbit center unresolved; supply one or derive it");
      break;
    case TrajectorySpec::Kind::Linear: {
      double n = spec.direction.norm();
      if (std::abs(n - 1.0) > 1e-9)
        fail(ErrorCode::InvalidArgument, "linear direction must be a unit vector");
      if (!spec.distance || !std::isfinite(*spec.distance))
        fail(ErrorCode::InvalidArgument, "linear distance unresolved; supply one or derive it");
      if (spec.frames == 1 && *spec.distance != 0.0)
        fail(ErrorCode::DegenerateSpec, "single-frame linear move with nonzero distance");
      break;
    }
    case TrajectorySpec::Kind::Identity:
      break;
  }
}

}  // namespace

CameraTrajectory make_trajectory(const TrajectorySpec& spec,
                                 [[maybe_unused]] const CameraIntrinsics& k) {
  validate_spec(spec);
  CameraTrajectory traj;
  traj.poses.reserve(spec.frames);
  traj.poses.push_back(CameraPose::identity());

  switch (spec.kind) {
    case TrajectorySpec::Kind::Identity:
      for (int i = 1; i < spec.frames; ++i) traj.poses.push_back(CameraPose::identity());
      break;
    case TrajectorySpec::Kind::Linear: {
      for (int i = 1; i < spec.frames; ++i) {
        double s = *spec.distance * static_cast<double>(i) / (spec.frames - 1);
        Vec3 offset = spec.direction * s;
        traj.poses.push_back(CameraPose{Mat3::identity(), -offset});
      }
      break;
    }
    case TrajectorySpec::Kind::Orbit: {
      Vec3 center = *spec.center;
      if (std::hypot(center.x, center.z) < 1e-9)
        fail(ErrorCode::DegenerateSpec, "orbit center lies on the camera's vertical axis");
      double sign = spec.leftward_positive ? 1.0 : -1.0;
      Vec3 start_offset = -center;  // camera starts at the origin
      for (int i = 1; i < spec.frames; ++i) {
        double theta =
            sign * spec.angle_deg * kPi / 180.0 * static_cast<double>(i) / (spec.frames - 1);
        Vec3 eye = center + Mat3::rotation_y(theta) * start_offset;
        traj.poses.push_back(look_at(eye, center));
      }
      break;
    }
  }
  return traj;
}

PointCloudSequence tracks_to_pointclouds(const TrackSet& tracks, const ColorGrid& colors,
                                         const CameraIntrinsics& k, bool include_occluded) {
  if (colors.height != tracks.height() || colors.width != tracks.width())
    fail(ErrorCode::ShapeMismatch, "color grid does not match the track grid");
  const int T = tracks.frames();
  const int H = tracks.height();
  const int W = tracks.width();
  PointCloudSequence pcs = PointCloudSequence::make(T, H * W);
  pcs.grid_height = H;
  pcs.grid_width = W;
  pcs.colors = colors.rgb;

#pragma omp parallel for schedule(static)
  for (int t = 0; t < T; ++t) {
    for (int row = 0; row < H; ++row) {
      for (int col = 0; col < W; ++col) {
        int n = row * W + col;
        const TrackSample& s = tracks.at(t, row, col);
        auto d = valid_depth(s.d);
        if (d && std::isfinite(s.u) && std::isfinite(s.v)) {
          pcs.set_position(t, n, backproject(s.u, s.v, *d, k));
          pcs.set_visible(t, n, include_occluded || s.occluded == 0);
        } else {
          pcs.set_position(t, n, Vec3{});
          pcs.set_visible(t, n, false);
        }
      }
    }
  }
  return pcs;
}

DepthMap frame0_depth(const TrackSet& tracks) {
  DepthMap dm(tracks.height(), tracks.width());
  for (int row = 0; row < tracks.height(); ++row)
    for (int col = 0; col < tracks.width(); ++col)
      if (auto d = tracks.depth_at(0, row, col)) dm.raw(row, col) = *d;
  return dm;
}

Vec3 scene_centroid(const TrackSet& tracks, const CameraIntrinsics& k) {
  Vec3 sum{};
  size_t count = 0;
  for (int row = 0; row < tracks.height(); ++row)
    for (int col = 0; col < tracks.width(); ++col) {
      const TrackSample& s = tracks.at(0, row, col);
      if (auto d = valid_depth(s.d)) {
        sum = sum + backproject(s.u, s.v, *d, k);
        ++count;
      }
    }
  if (count == 0) fail(ErrorCode::InsufficientData, "no valid frame-0 depths for a centroid");
  return sum * (1.0 / static_cast<double>(count));
}

double median_scene_depth(const TrackSet& tracks) {
  std::vector<float> depths;
  depths.reserve(static_cast<size_t>(tracks.height()) * tracks.width());
  for (int row = 0; row < tracks.height(); ++row)
    for (int col = 0; col < tracks.width(); ++col)
      if (auto d = tracks.depth_at(0, row, col)) depths.push_back(*d);
  if (depths.empty()) fail(ErrorCode::InsufficientData, "no valid frame-0 depths for a median");
  size_t mid = depths.size() / 2;
  std::nth_element(depths.begin(), depths.begin() + mid, depths.end());
  double hi = depths[mid];
  if (depths.size() % 2 == 1) return hi;
  double lo = *std::max_element(depths.begin(), depths.begin() + mid);
  return 0.5 * (lo + hi);
}

PointCloudSequence uniformly_scaled(const PointCloudSequence& pcs, double s) {
  if (!(s > 0.0) || !std::isfinite(s))
    fail(ErrorCode::InvalidArgument, "scale must be finite and > 0");
  PointCloudSequence out = pcs;
  for (double& v : out.positions) v *= s;
  return out;
}

namespace {

Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3)
    fail(ErrorCode::InvalidArgument, "expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

TrajectorySpec TrajectorySpec::parse_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("trajectory spec is not valid JSON: ") +
                                         e.what());
  }
  TrajectorySpec spec;
  std::string kind = j.value("kind", "");
  if (kind == "orbit")
    spec.kind = Kind::Orbit;
  else if (kind == "linear")
    spec.kind = Kind::Linear;
  else if (kind == "identity")
    spec.kind = Kind::Identity;
  else
    fail(ErrorCode::InvalidArgument, "trajectory kind must be orbit, linear or identity");
  spec.frames = j.value("frames", 1);
  if (spec.kind == Kind::Orbit) {
    spec.angle_deg = j.value("angle_deg", 0.0);
    if (j.contains("center")) spec.center = vec3_from_json(j.at("center"));
    spec.leftward_positive = j.value("leftward_positive", true);
  } else if (spec.kind == Kind::Linear) {
    if (j.contains("direction")) spec.direction = vec3_from_json(j.at("direction"));
    if (j.contains("distance"))
      spec.distance = j.at("distance").get<double>();
    else
      spec.distance.reset();  // resolved from the scene later
  }
  return spec;
}

std::string TrajectorySpec::to_json() const {
  nlohmann::json j;
  j["frames"] = frames;
  switch (kind) {
    case Kind::Orbit:
      j["kind"] = "orbit";
      j["angle_deg"] = angle_deg;
      j["leftward_positive"] = leftward_positive;
      if (center) j["center"] = {center->x, center->y, center->z};
      break;
    case Kind::Linear:
      j["kind"] = "linear";
      j["direction"] = {direction.x, direction.y, direction.z};
      if (distance) j["distance"] = *distance;
      break;
    case Kind::Identity:
      j["kind"] = "identity";
      break;
  }
  return j.dump(2);
}

}  // namespace t4d
