#pragma once

#include <filesystem>
#include <tuple>

#include "t4d/types.hpp"

namespace t4d {

// T4D container, little-endian throughout:
//   magic "T4D1" | u32 version = 1 | u32 T, H, W
//   u8 flags (bit 0: colors present, bit 1: intrinsics present)
//   f32 f_x, f_y, c_x, c_y
//   T*H*W records of (f32 u, f32 v, f32 d, u8 o)
//   if colors present: H*W * (f32 r, g, b)
// Depth sentinel: d = -1.0 with o = 1.

struct T4dContents {
  TrackSet tracks;
  ColorGrid colors;
  CameraIntrinsics intrinsics;
};

void save_t4d(const TrackSet& tracks, const ColorGrid& colors, const CameraIntrinsics& k,
              const std::filesystem::path& path);

// Errors: bad magic, truncated payload, dimension mismatch between header and
// payload -- each a distinct ErrorCode.
T4dContents load_t4d(const std::filesystem::path& path);

}  // namespace t4d
