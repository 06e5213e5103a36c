#pragma once

#include <array>
#include <filesystem>

#include "t4d/motion.hpp"

namespace t4d {

struct ChannelRange {
  float lo = -1.0f;
  float hi = 1.0f;
};

constexpr std::array<ChannelRange, 3> kDefaultCodecRange{
    ChannelRange{-1.0f, 1.0f}, ChannelRange{-1.0f, 1.0f}, ChannelRange{-1.0f, 1.0f}};

// Normalized motion quantized per channel to 16 bits with an affine map:
//   code = round(65535 * clamp((x - lo)/(hi - lo), 0, 1))
// Roundtrip error is at most one quantization step per component; the range
// is stored in the file so it is never implicit.
struct MotionMap {
  int frames = 0, height = 0, width = 0;
  std::array<ChannelRange, 3> range = kDefaultCodecRange;
  std::vector<uint16_t> codes;    // frames*height*width*3
  std::vector<uint8_t> validity;  // height*width
};

uint16_t quantize_value(double x, double lo, double hi);
double dequantize_code(uint16_t code, double lo, double hi);

// Throws DegenerateRange when any channel has hi <= lo.
MotionMap encode_motion_map(const NormalizedMotion& nm,
                            const std::array<ChannelRange, 3>& range = kDefaultCodecRange);
NormalizedMotion decode_motion_map(const MotionMap& mm);

// Motion-map file: magic "M4D1", u32 T, H, W, 3 x (f32 lo, f32 hi),
// then T*H*W*3 u16 little-endian codes, then H*W u8 validity.
void save_m4d(const MotionMap& mm, const std::filesystem::path& path);
MotionMap load_m4d(const std::filesystem::path& path);

namespace ref {
MotionMap encode_motion_map(const NormalizedMotion& nm,
                            const std::array<ChannelRange, 3>& range = kDefaultCodecRange);
NormalizedMotion decode_motion_map(const MotionMap& mm);
}  // namespace ref

}  // namespace t4d
