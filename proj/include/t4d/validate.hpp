#pragma once

#include <string>
#include <vector>

#include "t4d/types.hpp"

namespace t4d {

enum class ViolationKind {
  Anchoring,      // frame-0 (u, v) does not equal the pixel it is anchored to
  DepthEncoding,  // non-finite or non-positive depth stored as a raw value
};

struct Violation {
  ViolationKind kind;
  int t, row, col;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Lists every violated TrackSet invariant with its (t, row, col); never aborts.
ValidationReport validate(const TrackSet& tracks);

}  // namespace t4d
