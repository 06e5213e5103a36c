#pragma once

#include <string>
#include <vector>

#include "t4d/render.hpp"
#include "t4d/types.hpp"

namespace t4d {

struct QualityThresholds {
  double max_invalid_fraction = 0.02;  // depth-validity bound
  double depth_std_rel_max = 3.0;      // population std / median bound
  double scale_factor = 2.0;           // > 0 and != 1
  double max_render_diff = 0.01;       // mean per-pixel RGB difference bound
  double depth_anomalous_max = 1e4;    // meters; operationalizes "near-infinite"
};

struct CheckResult {
  std::string name;
  double statistic = 0.0;  // NaN when the check could not be evaluated
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

struct QualityReport {
  std::vector<CheckResult> checks;
  bool pass = false;  // conjunction of all checks
};

// Fraction of samples whose depth is the sentinel, non-finite, <= 0, or
// above the anomalous bound. Passes iff <= max_invalid_fraction.
CheckResult check_depth_validity(const TrackSet& tracks, const QualityThresholds& th);

// Population std of valid depths divided by their median. Throws
// InsufficientData with fewer than 2 valid depths.
CheckResult check_depth_dispersion(const TrackSet& tracks, const QualityThresholds& th);

// Renders frame 0 at scale 1 and scale_factor from the identity pose and
// compares; any scene built by back-projecting a depth map scores exactly 0.
CheckResult check_scale_consistency(const TrackSet& tracks, const ColorGrid& colors,
                                    const CameraIntrinsics& k, const QualityThresholds& th,
                                    const RenderConfig* cfg = nullptr);

// Runs all three checks; insufficient-data failures become failed checks.
QualityReport run_filters(const TrackSet& tracks, const ColorGrid& colors,
                          const CameraIntrinsics& k, const QualityThresholds& th);

std::string report_to_json(const QualityReport& report, const std::string& sample_id);

}  // namespace t4d
