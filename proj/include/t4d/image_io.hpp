#pragma once

#include <filesystem>
#include <span>

#include "t4d/render.hpp"

namespace t4d {

// Binary PPM (P6, 8-bit); channels mapped by round(clamp01(c) * 255).
void write_ppm(const std::filesystem::path& path, int width, int height,
               std::span<const float> rgb);

// Binary PGM (P5, 8-bit); the void-mask convention maps 0.5 -> 128, 1.0 -> 255.
void write_pgm(const std::filesystem::path& path, int width, int height,
               std::span<const float> gray);

// Strict binary variant of the mask: 255 where covered, 0 where void.
void write_binary_mask_pgm(const std::filesystem::path& path, int width, int height,
                           std::span<const float> mask);

struct SequenceManifest {
  std::vector<std::string> frame_files;
  std::vector<std::string> mask_files;
  std::vector<std::string> binary_mask_files;
  std::string trajectory_json;  // embedded verbatim
  RenderConfig config;
  int frames = 0, height = 0, width = 0;
};

// Writes frames/masks with zero-padded index names plus a JSON manifest;
// returns the manifest path.
std::filesystem::path write_sequence(const std::filesystem::path& out_dir,
                                     const FrameSequence& frames, const VoidMask& mask,
                                     const std::string& trajectory_json,
                                     const RenderConfig& cfg);

}  // namespace t4d
