#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "toonbench/mask.hpp"

namespace toonbench {

/// Reads a PNG mask. 8-bit gray is copied verbatim; inputs with an alpha
/// channel yield that channel; RGB without alpha collapses to Rec.601 luma
/// rounded to the nearest integer; 16-bit samples are rescaled with
/// round-half-up division by 257.
AlphaMask load_mask(const std::filesystem::path& path);
AlphaMask decode_mask_png(std::span<const std::uint8_t> bytes);

/// Writes an 8-bit grayscale PNG.
void save_mask(const std::filesystem::path& path, const AlphaMask& mask);
std::vector<std::uint8_t> encode_mask_png(const AlphaMask& mask);

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // interleaved, row-major
};

/// Reads a PNG or JPEG as 8-bit RGB (alpha, if any, is dropped).
RgbImage load_rgb_image(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image);

struct ImageSize {
  int width = 0;
  int height = 0;
  bool operator==(const ImageSize&) const = default;
};

/// Header-only probe of a PNG or JPEG.
ImageSize read_image_size(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace toonbench
