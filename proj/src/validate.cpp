#include "t4d/validate.hpp"

#include <cmath>
#include <sstream>

namespace t4d {

namespace {

bool sentinel_encoded(const TrackSample& s) {
  return s.d == kInvalidDepth && s.occluded == 1;
}

}  // namespace

ValidationReport validate(const TrackSet& tracks) {
  ValidationReport report;
  for (int t = 0; t < tracks.frames(); ++t) {
    for (int row = 0; row < tracks.height(); ++row) {
      for (int col = 0; col < tracks.width(); ++col) {
        const TrackSample& s = tracks.at(t, row, col);
        if (t == 0 && (s.u != static_cast<float>(col) || s.v != static_cast<float>(row))) {
          std::ostringstream msg;
          msg << "frame-0 sample at (" << row << ", " << col << ") has (u, v) = (" << s.u << ", "
              << s.v << "), expected the anchor pixel";
          report.violations.push_back({ViolationKind::Anchoring, t, row, col, msg.str()});
        }
        bool depth_ok = std::isfinite(s.d) && s.d > 0.0f;
        if (!depth_ok && !sentinel_encoded(s)) {
          std::ostringstream msg;
          msg << "invalid depth " << s.d << " stored as a raw value instead of the sentinel";
          report.violations.push_back({ViolationKind::DepthEncoding, t, row, col, msg.str()});
        }
      }
    }
  }
  return report;
}

}  // namespace t4d
