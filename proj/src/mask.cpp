#include "toonbench/mask.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>

#include "toonbench/error.hpp"

namespace toonbench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::ZeroDimension: return "ZeroDimension";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::EmptyForeground: return "EmptyForeground";
    case ErrorCode::EmptyBands: return "EmptyBands";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::BothEmpty: return "BothEmpty";
    case ErrorCode::AlreadySplit: return "AlreadySplit";
    case ErrorCode::EmptyCategory: return "EmptyCategory";
    case ErrorCode::TargetTooLarge: return "TargetTooLarge";
    case ErrorCode::ManifestInvalid: return "ManifestInvalid";
    case ErrorCode::NoPairsResolved: return "NoPairsResolved";
    case ErrorCode::MissingPrediction: return "MissingPrediction";
    case ErrorCode::AmbiguousPrediction: return "AmbiguousPrediction";
    case ErrorCode::EmptyReports: return "EmptyReports";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::NoComparablePairs: return "NoComparablePairs";
    case ErrorCode::SessionNotInitialized: return "SessionNotInitialized";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::DuplicateSubmission: return "DuplicateSubmission";
    case ErrorCode::UnknownHandle: return "UnknownHandle";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

void check_dimensions(int width, int height, std::size_t length) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::ZeroDimension,
                "mask dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  if (length != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidArgument, "value count does not match width*height");
  }
}

}  // namespace

AlphaMask::AlphaMask(int width, int height, std::vector<std::uint8_t> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dimensions(width_, height_, values_.size());
}

AlphaMask::AlphaMask(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  check_dimensions(width_, height_, static_cast<std::size_t>(std::max(width, 0)) *
                                        static_cast<std::size_t>(std::max(height, 0)));
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  check_dimensions(width_, height_, bits_.size());
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
  check_dimensions(width_, height_, static_cast<std::size_t>(std::max(width, 0)) *
                                        static_cast<std::size_t>(std::max(height, 0)));
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::complement() const {
  std::vector<std::uint8_t> out(bits_.size());
  std::transform(bits_.begin(), bits_.end(), out.begin(),
                 [](std::uint8_t b) { return static_cast<std::uint8_t>(b ^ 1U); });
  return {width_, height_, std::move(out)};
}

bool BinaryMask::is_subset_of(const BinaryMask& other) const {
  if (width_ != other.width_ || height_ != other.height_) return false;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

namespace {

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, Op op) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::DimensionMismatch, "binary masks differ in size");
  }
  std::vector<std::uint8_t> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]) ? 1 : 0;
  return {a.width(), a.height(), std::move(out)};
}

}  // namespace

BinaryMask operator&(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x && y; });
}

BinaryMask operator|(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x || y; });
}

BinaryMask subtract(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x && !y; });
}

MaskPair::MaskPair(AlphaMask prediction, AlphaMask ground_truth)
    : prediction_(std::move(prediction)), ground_truth_(std::move(ground_truth)) {
  if (prediction_.width() != ground_truth_.width() ||
      prediction_.height() != ground_truth_.height()) {
    throw Error(ErrorCode::DimensionMismatch,
                "prediction " + std::to_string(prediction_.width()) + "x" +
                    std::to_string(prediction_.height()) + " vs ground truth " +
                    std::to_string(ground_truth_.width()) + "x" +
                    std::to_string(ground_truth_.height()));
  }
}

BinaryMask binarize(const AlphaMask& mask, std::uint8_t threshold) {
  std::vector<std::uint8_t> bits(mask.size());
  const auto values = mask.values();
  std::transform(values.begin(), values.end(), bits.begin(),
                 [threshold](std::uint8_t v) { return static_cast<std::uint8_t>(v > threshold); });
  return {mask.width(), mask.height(), std::move(bits)};
}

AlphaMask abs_diff(const MaskPair& pair) {
  const auto p = pair.prediction().values();
  const auto g = pair.ground_truth().values();
  std::vector<std::uint8_t> out(p.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::abs(int{p[i]} - int{g[i]}));
  }
  return {pair.width(), pair.height(), std::move(out)};
}

}  // namespace toonbench
