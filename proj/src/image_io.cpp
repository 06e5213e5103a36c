#include "t4d/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace t4d {

namespace {

uint8_t to_byte(float v) {
  float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<uint8_t>(std::lround(c * 255.0f));
}

void write_pnm(const std::filesystem::path& path, const char* magic, int width, int height,
               const std::vector<uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  f << magic << "\n" << width << " " << height << "\n255\n";
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::string indexed_name(const char* stem, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.%s", stem, index, ext);
  return buf;
}

}  // namespace

void write_ppm(const std::filesystem::path& path, int width, int height,
               std::span<const float> rgb) {
  if (rgb.size() != static_cast<size_t>(width) * height * 3)
    fail(ErrorCode::ShapeMismatch, "rgb buffer does not match the image dimensions");
  std::vector<uint8_t> bytes(rgb.size());
  for (size_t i = 0; i < rgb.size(); ++i) bytes[i] = to_byte(rgb[i]);
  write_pnm(path, "P6", width, height, bytes);
}

void write_pgm(const std::filesystem::path& path, int width, int height,
               std::span<const float> gray) {
  if (gray.size() != static_cast<size_t>(width) * height)
    fail(ErrorCode::ShapeMismatch, "gray buffer does not match the image dimensions");
  std::vector<uint8_t> bytes(gray.size());
  for (size_t i = 0; i < gray.size(); ++i) bytes[i] = to_byte(gray[i]);
  write_pnm(path, "P5", width, height, bytes);
}

void write_binary_mask_pgm(const std::filesystem::path& path, int width, int height,
                           std::span<const float> mask) {
  if (mask.size() != static_cast<size_t>(width) * height)
    fail(ErrorCode::ShapeMismatch, "mask buffer does not match the image dimensions");
  std::vector<uint8_t> bytes(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) bytes[i] = mask[i] == 1.0f ? 255 : 0;
  write_pnm(path, "P5", width, height, bytes);
}

std::filesystem::path write_sequence(const std::filesystem::path& out_dir,
                                     const FrameSequence& frames, const VoidMask& mask,
                                     const std::string& trajectory_json,
                                     const RenderConfig& cfg) {
  std::filesystem::create_directories(out_dir);
  SequenceManifest man;
  man.frames = frames.frames;
  man.height = frames.height;
  man.width = frames.width;

  const size_t npx = static_cast<size_t>(frames.height) * frames.width;
  for (int t = 0; t < frames.frames; ++t) {
    std::string frame_name = indexed_name("frame", t, "ppm");
    std::string mask_name = indexed_name("mask", t, "pgm");
    std::string bin_name = indexed_name("maskbin", t, "pgm");
    write_ppm(out_dir / frame_name, frames.width, frames.height,
              {frames.rgb.data() + static_cast<size_t>(t) * npx * 3, npx * 3});
    write_pgm(out_dir / mask_name, mask.width, mask.height,
              {mask.value.data() + static_cast<size_t>(t) * npx, npx});
    write_binary_mask_pgm(out_dir / bin_name, mask.width, mask.height,
                          {mask.value.data() + static_cast<size_t>(t) * npx, npx});
    man.frame_files.push_back(frame_name);
    man.mask_files.push_back(mask_name);
    man.binary_mask_files.push_back(bin_name);
  }

  nlohmann::json j;
  j["frame_count"] = man.frames;
  j["width"] = man.width;
  j["height"] = man.height;
  j["frames"] = man.frame_files;
  j["masks"] = man.mask_files;
  j["binary_masks"] = man.binary_mask_files;
  if (!trajectory_json.empty()) {
    j["trajectory"] = nlohmann::json::parse(trajectory_json);
  }
  j["render_config"] = {{"width", cfg.width},
                        {"height", cfg.height},
                        {"splat_radius", cfg.splat_radius},
                        {"background", {cfg.background[0], cfg.background[1], cfg.background[2]}},
                        {"z_near", cfg.z_near}};

  std::filesystem::path manifest = out_dir / "manifest.json";
  std::ofstream f(manifest, std::ios::trunc);
  if (!f) fail(ErrorCode::IoFailure, "cannot open " + manifest.string() + " for writing");
  f << j.dump(2) << "\n";
  if (!f) fail(ErrorCode::IoFailure, "write failed for " + manifest.string());
  return manifest;
}

}  // namespace t4d
