#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "toonbench/mask.hpp"

namespace fixtures {

using toonbench::AlphaMask;
using toonbench::MaskPair;

/// Binary (0/255) ground truth made of a few rectangles and ellipses,
/// guaranteed to hold both foreground and background.
AlphaMask random_binary_gt(std::mt19937_64& rng, int w, int h);

/// A prediction derived from `gt`: shifted, noised, softened or replaced by
/// unrelated blobs, chosen at random.
AlphaMask random_prediction(std::mt19937_64& rng, const AlphaMask& gt);

/// Arbitrary 8-bit pair with mixed binarised ground truth.
MaskPair random_pair(std::mt19937_64& rng, int w, int h);

AlphaMask flip_horizontal(const AlphaMask& m);
AlphaMask flip_vertical(const AlphaMask& m);
AlphaMask rotate90(const AlphaMask& m);  // clockwise

AlphaMask filled_rect(int w, int h, int x0, int y0, int rw, int rh, std::uint8_t inside,
                      std::uint8_t outside = 0);

/// Writes a PNG with libpng directly, bypassing the library under test.
/// `samples` holds channels * width * height values at `bit_depth` (8 or 16).
void write_png(const std::filesystem::path& path, int w, int h, int color_type, int bit_depth,
               const std::vector<std::uint16_t>& samples);

/// Baseline 8-bit RGB JPEG at the given quality.
void write_jpeg(const std::filesystem::path& path, int w, int h, const std::vector<std::uint8_t>& rgb,
                int quality = 95);

/// Fresh, empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

/// Six images (one per category) with ground truths and two prediction
/// sets, written under `root`: manifest.json, images/, masks/, pred_a/, pred_b/.
/// All records are placed in the test split.
void write_benchmark_fixture(const std::filesystem::path& root);

}  // namespace fixtures
