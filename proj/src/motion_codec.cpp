#include "t4d/motion_codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace t4d {

uint16_t quantize_value(double x, double lo, double hi) {
  double t = (x - lo) / (hi - lo);
  t = std::clamp(t, 0.0, 1.0);
  return static_cast<uint16_t>(std::lround(t * 65535.0));
}

double dequantize_code(uint16_t code, double lo, double hi) {
  return lo + (static_cast<double>(code) / 65535.0) * (hi - lo);
}

namespace {

void check_range(const std::array<ChannelRange, 3>& range) {
  for (const ChannelRange& r : range)
    if (!(r.lo < r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
      fail(ErrorCode::DegenerateRange, "codec range must satisfy lo < hi");
}

MotionMap encode_impl(const NormalizedMotion& nm, const std::array<ChannelRange, 3>& range,
                      bool parallel) {
  check_range(range);
  MotionMap mm;
  mm.frames = nm.frames;
  mm.height = nm.height;
  mm.width = nm.width;
  mm.range = range;
  mm.validity = nm.validity;
  mm.codes.resize(nm.ndelta.size());
  const double lo[3] = {range[0].lo, range[1].lo, range[2].lo};
  const double hi[3] = {range[0].hi, range[1].hi, range[2].hi};
  const int64_t n = static_cast<int64_t>(nm.ndelta.size());
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
      int c = static_cast<int>(i % 3);
      mm.codes[i] = quantize_value(nm.ndelta[i], lo[c], hi[c]);
    }
  } else {
    for (int64_t i = 0; i < n; ++i) {
      int c = static_cast<int>(i % 3);
      mm.codes[i] = quantize_value(nm.ndelta[i], lo[c], hi[c]);
    }
  }
  return mm;
}

NormalizedMotion decode_impl(const MotionMap& mm, bool parallel) {
  check_range(mm.range);
  NormalizedMotion nm = NormalizedMotion::make(mm.frames, mm.height, mm.width);
  if (mm.codes.size() != nm.ndelta.size() ||
      mm.validity.size() != static_cast<size_t>(mm.height) * mm.width)
    fail(ErrorCode::ShapeMismatch, "motion map payload does not match its dimensions");
  nm.validity = mm.validity;
  const double lo[3] = {mm.range[0].lo, mm.range[1].lo, mm.range[2].lo};
  const double hi[3] = {mm.range[0].hi, mm.range[1].hi, mm.range[2].hi};
  const int64_t n = static_cast<int64_t>(mm.codes.size());
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
      int c = static_cast<int>(i % 3);
      nm.ndelta[i] = dequantize_code(mm.codes[i], lo[c], hi[c]);
    }
  } else {
    for (int64_t i = 0; i < n; ++i) {
      int c = static_cast<int>(i % 3);
      nm.ndelta[i] = dequantize_code(mm.codes[i], lo[c], hi[c]);
    }
  }
  return nm;
}

constexpr char kMagic[4] = {'M', '4', 'D', '1'};

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 24));
}

void put_f32(std::vector<uint8_t>& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(out, bits);
}

}  // namespace

MotionMap encode_motion_map(const NormalizedMotion& nm, const std::array<ChannelRange, 3>& range) {
  return encode_impl(nm, range, true);
}

NormalizedMotion decode_motion_map(const MotionMap& mm) { return decode_impl(mm, true); }

namespace ref {

MotionMap encode_motion_map(const NormalizedMotion& nm, const std::array<ChannelRange, 3>& range) {
  return encode_impl(nm, range, false);
}

NormalizedMotion decode_motion_map(const MotionMap& mm) { return decode_impl(mm, false); }

}  // namespace ref

void save_m4d(const MotionMap& mm, const std::filesystem::path& path) {
  check_range(mm.range);
  std::vector<uint8_t> out;
  out.reserve(40 + mm.codes.size() * 2 + mm.validity.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, static_cast<uint32_t>(mm.frames));
  put_u32(out, static_cast<uint32_t>(mm.height));
  put_u32(out, static_cast<uint32_t>(mm.width));
  for (const ChannelRange& r : mm.range) {
    put_f32(out, r.lo);
    put_f32(out, r.hi);
  }
  for (uint16_t code : mm.codes) {
    out.push_back(static_cast<uint8_t>(code));
    out.push_back(static_cast<uint8_t>(code >> 8));
  }
  out.insert(out.end(), mm.validity.begin(), mm.validity.end());

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorCode::IoFailure, "write failed for " + path.string());
}

MotionMap load_m4d(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  size_t pos = 0;
  auto need = [&](size_t n) {
    if (pos + n > buf.size()) fail(ErrorCode::Truncated, "file ends before expected payload");
  };
  auto u32 = [&]() {
    need(4);
    uint32_t v = static_cast<uint32_t>(buf[pos]) | (static_cast<uint32_t>(buf[pos + 1]) << 8) |
                 (static_cast<uint32_t>(buf[pos + 2]) << 16) |
                 (static_cast<uint32_t>(buf[pos + 3]) << 24);
    pos += 4;
    return v;
  };
  auto f32 = [&]() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  };

  need(4);
  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    fail(ErrorCode::BadMagic, "not a motion-map file: " + path.string());
  pos = 4;
  uint32_t t = u32(), h = u32(), w = u32();
  if (t < 1 || h < 1 || w < 1) fail(ErrorCode::DimensionMismatch, "header declares a zero dimension");
  MotionMap mm;
  mm.frames = static_cast<int>(t);
  mm.height = static_cast<int>(h);
  mm.width = static_cast<int>(w);
  for (ChannelRange& r : mm.range) {
    r.lo = f32();
    r.hi = f32();
  }
  check_range(mm.range);

  size_t count = static_cast<size_t>(t) * h * w * 3;
  size_t expected = pos + count * 2 + static_cast<size_t>(h) * w;
  if (buf.size() < expected) fail(ErrorCode::Truncated, "payload shorter than the header promises");
  if (buf.size() > expected)
    fail(ErrorCode::DimensionMismatch, "payload larger than the header promises");

  mm.codes.resize(count);
  for (size_t i = 0; i < count; ++i) {
    mm.codes[i] = static_cast<uint16_t>(buf[pos] | (buf[pos + 1] << 8));
    pos += 2;
  }
  mm.validity.assign(buf.begin() + pos, buf.end());
  return mm;
}

}  // namespace t4d
