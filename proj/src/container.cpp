#include "t4d/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace t4d {

namespace {

constexpr char kMagic[4] = {'T', '4', 'D', '1'};
constexpr uint32_t kVersion = 1;
constexpr uint8_t kFlagColors = 0x01;
constexpr uint8_t kFlagIntrinsics = 0x02;

void put_u8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }

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

struct Cursor {
  const uint8_t* data;
  size_t size;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > size) fail(ErrorCode::Truncated, "file ends before expected payload");
  }
  uint8_t u8() {
    need(1);
    return data[pos++];
  }
  uint32_t u32() {
    need(4);
    uint32_t v = static_cast<uint32_t>(data[pos]) | (static_cast<uint32_t>(data[pos + 1]) << 8) |
                 (static_cast<uint32_t>(data[pos + 2]) << 16) |
                 (static_cast<uint32_t>(data[pos + 3]) << 24);
    pos += 4;
    return v;
  }
  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
};

std::vector<uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  std::streamoff len = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<uint8_t> buf(static_cast<size_t>(len));
  if (len > 0) in.read(reinterpret_cast<char*>(buf.data()), len);
  if (!in) fail(ErrorCode::IoFailure, "read failed for " + path.string());
  return buf;
}

}  // namespace

void save_t4d(const TrackSet& tracks, const ColorGrid& colors, const CameraIntrinsics& k,
              const std::filesystem::path& path) {
  if (colors.height != tracks.height() || colors.width != tracks.width())
    fail(ErrorCode::DimensionMismatch, "color grid does not match the track grid");
  if (k.width != tracks.width() || k.height != tracks.height())
    fail(ErrorCode::DimensionMismatch, "intrinsics do not match the track grid");

  std::vector<uint8_t> out;
  out.reserve(37 + tracks.sample_count() * 13 +
              static_cast<size_t>(colors.height) * colors.width * 12);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(tracks.frames()));
  put_u32(out, static_cast<uint32_t>(tracks.height()));
  put_u32(out, static_cast<uint32_t>(tracks.width()));
  put_u8(out, kFlagColors | kFlagIntrinsics);
  put_f32(out, static_cast<float>(k.fx));
  put_f32(out, static_cast<float>(k.fy));
  put_f32(out, static_cast<float>(k.cx));
  put_f32(out, static_cast<float>(k.cy));
  for (const TrackSample& s : tracks.samples()) {
    put_f32(out, s.u);
    put_f32(out, s.v);
    put_f32(out, s.d);
    put_u8(out, s.occluded);
  }
  for (float c : colors.rgb) put_f32(out, c);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorCode::IoFailure, "write failed for " + path.string());
}

T4dContents load_t4d(const std::filesystem::path& path) {
  std::vector<uint8_t> buf = read_all(path);
  Cursor cur{buf.data(), buf.size()};

  cur.need(4);
  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    fail(ErrorCode::BadMagic, "not a T4D container: " + path.string());
  cur.pos = 4;
  uint32_t version = cur.u32();
  if (version != kVersion)
    fail(ErrorCode::UnsupportedVersion, "unsupported T4D version " + std::to_string(version));

  uint32_t t = cur.u32();
  uint32_t h = cur.u32();
  uint32_t w = cur.u32();
  if (t < 1 || h < 1 || w < 1)
    fail(ErrorCode::DimensionMismatch, "header declares a zero dimension");
  if (t > (1u << 20) || h > (1u << 16) || w > (1u << 16))
    fail(ErrorCode::DimensionMismatch, "header dimensions are implausibly large");
  uint8_t flags = cur.u8();
  float fx = cur.f32();
  float fy = cur.f32();
  float cx = cur.f32();
  float cy = cur.f32();

  size_t expected = cur.pos + static_cast<size_t>(t) * h * w * 13;
  if (flags & kFlagColors) expected += static_cast<size_t>(h) * w * 12;
  if (buf.size() < expected)
    fail(ErrorCode::Truncated, "payload shorter than the header promises");
  if (buf.size() > expected)
    fail(ErrorCode::DimensionMismatch, "payload larger than the header promises");

  T4dContents c{TrackSet(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w)),
                ColorGrid(static_cast<int>(h), static_cast<int>(w)), CameraIntrinsics{}};
  for (TrackSample& s : c.tracks.samples()) {
    s.u = cur.f32();
    s.v = cur.f32();
    s.d = cur.f32();
    s.occluded = cur.u8();
  }
  if (flags & kFlagColors) {
    for (float& v : c.colors.rgb) v = cur.f32();
  }
  if (flags & kFlagIntrinsics) {
    c.intrinsics = CameraIntrinsics(fx, fy, cx, cy, static_cast<int>(w), static_cast<int>(h));
  } else {
    // Synthesize plausible intrinsics so downstream geometry stays usable.
    double f = std::max(w, h);
    c.intrinsics =
        CameraIntrinsics(f, f, (w - 1) * 0.5, (h - 1) * 0.5, static_cast<int>(w),
                         static_cast<int>(h));
  }
  return c;
}

}  // namespace t4d
