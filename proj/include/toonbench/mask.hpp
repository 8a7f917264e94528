#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace toonbench {

/// 8-bit alpha matte: 0 is background, 255 is foreground, anything between
/// is partial transparency. Row-major, immutable once built.
class AlphaMask {
 public:
  AlphaMask(int width, int height, std::vector<std::uint8_t> values);
  AlphaMask(int width, int height, std::uint8_t fill);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::uint8_t at(int x, int y) const noexcept {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint8_t operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const std::uint8_t> values() const noexcept { return values_; }

  bool operator==(const AlphaMask&) const = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> values_;
};

/// Row-major boolean grid. Bits are stored one per byte (0 or 1).
class BinaryMask {
 public:
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);
  BinaryMask(int width, int height, bool fill = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(int x, int y) const noexcept {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  std::size_t count() const noexcept;
  bool empty() const noexcept { return count() == 0; }

  BinaryMask complement() const;
  bool is_subset_of(const BinaryMask& other) const;

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

BinaryMask operator&(const BinaryMask& a, const BinaryMask& b);
BinaryMask operator|(const BinaryMask& a, const BinaryMask& b);
/// a AND NOT b
BinaryMask subtract(const BinaryMask& a, const BinaryMask& b);

/// A prediction and its ground truth at identical resolution.
class MaskPair {
 public:
  MaskPair(AlphaMask prediction, AlphaMask ground_truth);

  const AlphaMask& prediction() const noexcept { return prediction_; }
  const AlphaMask& ground_truth() const noexcept { return ground_truth_; }
  int width() const noexcept { return prediction_.width(); }
  int height() const noexcept { return prediction_.height(); }
  std::size_t size() const noexcept { return prediction_.size(); }

 private:
  AlphaMask prediction_;
  AlphaMask ground_truth_;
};

inline constexpr std::uint8_t kDefaultForegroundThreshold = 128;

/// Bit set iff value > threshold (strict).
BinaryMask binarize(const AlphaMask& mask, std::uint8_t threshold = kDefaultForegroundThreshold);

/// Per-pixel |prediction - ground truth|.
AlphaMask abs_diff(const MaskPair& pair);

}  // namespace toonbench
