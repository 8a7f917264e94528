#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "toonbench/mask.hpp"

namespace toonbench {

enum class ElementShape { Square3x3, Cross3x3 };

/// How pixels outside the image are valued during erosion/dilation.
enum class OutOfBounds { AsBackground, AsForeground };

struct StructuringElement {
  ElementShape shape = ElementShape::Square3x3;
  OutOfBounds out_of_bounds = OutOfBounds::AsBackground;
};

/// Bit survives iff every pixel under the element is set. Applied
/// `iterations` times; zero iterations returns the input unchanged.
BinaryMask erode(const BinaryMask& mask, StructuringElement se, int iterations = 1);

/// Bit set iff any pixel under the element is set.
BinaryMask dilate(const BinaryMask& mask, StructuringElement se, int iterations = 1);

/// Inner band of set pixels lying within Chebyshev distance `radius` of a
/// background pixel. The image frame does not count as background.
BinaryMask boundary_band(const BinaryMask& mask, int radius);

/// Exact Euclidean distance to the nearest set pixel, with that pixel's
/// linear index. When several set pixels are equally near, the one with the
/// smallest column is reported, then the smallest row.
class DistanceField {
 public:
  DistanceField(int width, int height, std::vector<std::int64_t> squared,
                std::vector<std::size_t> nearest);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  double distance(std::size_t i) const;
  double distance(int x, int y) const { return distance(index(x, y)); }
  std::int64_t squared_distance(std::size_t i) const noexcept { return squared_[i]; }
  std::size_t nearest_index(std::size_t i) const noexcept { return nearest_[i]; }
  std::size_t nearest_index(int x, int y) const noexcept { return nearest_[index(x, y)]; }

  std::span<const std::int64_t> squared_distances() const noexcept { return squared_; }
  std::span<const std::size_t> nearest_indices() const noexcept { return nearest_; }

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_;
  int height_;
  std::vector<std::int64_t> squared_;
  std::vector<std::size_t> nearest_;
};

/// Throws EmptyMask when no bit is set.
DistanceField distance_transform(const BinaryMask& mask);

}  // namespace toonbench
