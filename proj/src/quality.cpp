#include "t4d/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "t4d/geometry.hpp"

namespace t4d {

namespace {

void check_thresholds(const QualityThresholds& th) {
  if (!(th.max_invalid_fraction >= 0.0 && th.max_invalid_fraction <= 1.0))
    fail(ErrorCode::InvalidArgument, "max_invalid_fraction must be in [0, 1]");
  if (!(th.depth_std_rel_max >= 0.0) || !std::isfinite(th.depth_std_rel_max))
    fail(ErrorCode::InvalidArgument, "depth_std_rel_max must be finite and >= 0");
  if (!(th.scale_factor > 0.0) || th.scale_factor == 1.0 || !std::isfinite(th.scale_factor))
    fail(ErrorCode::InvalidArgument, "scale_factor must be finite, > 0 and != 1");
  if (!(th.max_render_diff >= 0.0 && th.max_render_diff <= 1.0))
    fail(ErrorCode::InvalidArgument, "max_render_diff must be in [0, 1]");
}

bool depth_usable(float d, double anomalous_max) {
  return std::isfinite(d) && d > 0.0f && d <= anomalous_max;
}

}  // namespace

CheckResult check_depth_validity(const TrackSet& tracks, const QualityThresholds& th) {
  check_thresholds(th);
  size_t invalid = 0;
  for (const TrackSample& s : tracks.samples())
    if (!depth_usable(s.d, th.depth_anomalous_max)) ++invalid;
  double fraction = static_cast<double>(invalid) / static_cast<double>(tracks.sample_count());
  return {"depth_validity", fraction, th.max_invalid_fraction,
          fraction <= th.max_invalid_fraction, ""};
}

CheckResult check_depth_dispersion(const TrackSet& tracks, const QualityThresholds& th) {
  check_thresholds(th);
  std::vector<double> depths;
  depths.reserve(tracks.sample_count());
  for (const TrackSample& s : tracks.samples())
    if (depth_usable(s.d, th.depth_anomalous_max)) depths.push_back(s.d);
  if (depths.size() < 2)
    fail(ErrorCode::InsufficientData, "dispersion needs at least 2 valid depths");

  double mean = 0.0;
  for (double d : depths) mean += d;
  mean /= static_cast<double>(depths.size());
  double var = 0.0;
  for (double d : depths) var += (d - mean) * (d - mean);
  var /= static_cast<double>(depths.size());  // population convention
  double stddev = std::sqrt(var);

  size_t mid = depths.size() / 2;
  std::nth_element(depths.begin(), depths.begin() + mid, depths.end());
  double median = depths[mid];
  if (depths.size() % 2 == 0) {
    double lo = *std::max_element(depths.begin(), depths.begin() + mid);
    median = 0.5 * (lo + median);
  }

  double statistic = stddev / median;
  return {"depth_dispersion", statistic, th.depth_std_rel_max, statistic <= th.depth_std_rel_max,
          "population std / median"};
}

CheckResult check_scale_consistency(const TrackSet& tracks, const ColorGrid& colors,
                                    const CameraIntrinsics& k, const QualityThresholds& th,
                                    const RenderConfig* cfg) {
  check_thresholds(th);
  RenderConfig rc = cfg ? *cfg : RenderConfig{};

  // Frame-0 cloud only; occluded points still carry frame-0 geometry here.
  PointCloudSequence p0 = PointCloudSequence::make(1, tracks.height() * tracks.width());
  p0.grid_height = tracks.height();
  p0.grid_width = tracks.width();
  p0.colors = colors.rgb;
  for (int row = 0; row < tracks.height(); ++row)
    for (int col = 0; col < tracks.width(); ++col) {
      int n = row * tracks.width() + col;
      const TrackSample& s = tracks.at(0, row, col);
      if (auto d = valid_depth(s.d)) {
        p0.set_position(0, n, backproject(s.u, s.v, *d, k));
        p0.set_visible(0, n, true);
      }
    }

  FrameRender base = splat_frame(p0, 0, k, CameraPose::identity(), rc);
  PointCloudSequence scaled = uniformly_scaled(p0, th.scale_factor);
  FrameRender other = splat_frame(scaled, 0, k, CameraPose::identity(), rc);

  double total = 0.0;
  for (size_t i = 0; i < base.rgb.size(); ++i)
    total += std::abs(static_cast<double>(base.rgb[i]) - other.rgb[i]);
  double statistic = total / static_cast<double>(base.rgb.size());
  return {"scale_consistency", statistic, th.max_render_diff, statistic <= th.max_render_diff,
          ""};
}

QualityReport run_filters(const TrackSet& tracks, const ColorGrid& colors,
                          const CameraIntrinsics& k, const QualityThresholds& th) {
  check_thresholds(th);
  QualityReport report;
  report.checks.push_back(check_depth_validity(tracks, th));
  try {
    report.checks.push_back(check_depth_dispersion(tracks, th));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientData) throw;
    report.checks.push_back({"depth_dispersion", std::numeric_limits<double>::quiet_NaN(),
                             th.depth_std_rel_max, false, e.what()});
  }
  report.checks.push_back(check_scale_consistency(tracks, colors, k, th));
  report.pass = true;
  for (const CheckResult& c : report.checks) report.pass = report.pass && c.pass;
  return report;
}

std::string report_to_json(const QualityReport& report, const std::string& sample_id) {
  nlohmann::json j;
  j["sample"] = sample_id;
  j["pass"] = report.pass;
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckResult& c : report.checks) {
    nlohmann::json cj;
    cj["name"] = c.name;
    if (std::isfinite(c.statistic))
      cj["statistic"] = c.statistic;
    else
      cj["statistic"] = nullptr;
    cj["threshold"] = c.threshold;
    cj["pass"] = c.pass;
    if (!c.note.empty()) cj["note"] = c.note;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  return j.dump();
}

}  // namespace t4d
