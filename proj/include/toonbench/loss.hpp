#pragma once

#include <span>

#include "toonbench/mask.hpp"

namespace toonbench {

/// Coefficients of the SSIM + MAE + IoU training objective.
struct LossWeights {
  double ssim = 10.0;
  double mae = 90.0;
  double iou = 0.25;

  void validate() const;
};

struct LossBreakdown {
  double ssim = 0.0;
  double mae = 0.0;
  double iou = 0.0;
  double bce = 0.0;    // reported, never added into total
  double total = 0.0;  // weights.ssim * ssim + weights.mae * mae + weights.iou * iou
};

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;
inline constexpr double kBceEpsilon = 1e-7;

/// 1 - mean SSIM over every fully contained 11x11 Gaussian window.
/// Throws TooSmall below 11x11.
double ssim_loss(const MaskPair& pair);

/// Identical to the MAE metric.
double mae_loss(const MaskPair& pair);

/// 1 - sum(p*g) / sum(p + g - p*g). Throws BothEmpty when both masks are zero.
double iou_loss(const MaskPair& pair);
/// Same on maps already normalised to [0,1]; spans must have equal length.
double iou_loss(std::span<const double> prediction, std::span<const double> target);

/// Mean binary cross-entropy of normalised prediction against normalised
/// ground truth. Clamped at zero (the epsilon guard can push it to -1e-7).
double bce_score(const MaskPair& pair);
double bce_score(std::span<const double> prediction, std::span<const double> target);

LossBreakdown composite_loss(const MaskPair& pair, const LossWeights& weights = {});

}  // namespace toonbench
