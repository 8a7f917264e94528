#include "toonbench/loss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "toonbench/error.hpp"
#include "toonbench/metrics.hpp"

namespace toonbench {

void LossWeights::validate() const {
  if (!(ssim >= 0.0) || !(mae >= 0.0) || !(iou >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "loss weights must be non-negative");
  }
}

namespace {

std::array<double, kSsimWindow> gaussian_taps() {
  std::array<double, kSsimWindow> taps{};
  constexpr int half = kSsimWindow / 2;
  double total = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - half;
    taps[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
    total += taps[static_cast<std::size_t>(i)];
  }
  for (double& t : taps) t /= total;
  return taps;
}

// Separable Gaussian filter restricted to windows fully inside the image.
std::vector<double> filter_valid(const std::vector<double>& in, int w, int h) {
  static const auto taps = gaussian_taps();
  const int ow = w - kSsimWindow + 1;
  const int oh = h - kSsimWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) {
        acc += taps[static_cast<std::size_t>(k)] * in[static_cast<std::size_t>(y) * w + x + k];
      }
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) {
        acc += taps[static_cast<std::size_t>(k)] * rows[static_cast<std::size_t>(y + k) * ow + x];
      }
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim_loss(const MaskPair& pair) {
  const int w = pair.width();
  const int h = pair.height();
  if (w < kSsimWindow || h < kSsimWindow) {
    throw Error(ErrorCode::TooSmall, "SSIM needs at least 11x11 pixels, got " +
                                         std::to_string(w) + "x" + std::to_string(h));
  }
  const auto p = pair.prediction().values();
  const auto g = pair.ground_truth().values();
  const std::size_t n = p.size();
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = p[i] / 255.0;
    y[i] = g[i] / 255.0;
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(x, w, h);
  const auto mu_y = filter_valid(y, w, h);
  const auto e_xx = filter_valid(xx, w, h);
  const auto e_yy = filter_valid(yy, w, h);
  const auto e_xy = filter_valid(xy, w, h);

  double sum = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cxy = e_xy[i] - mx * my;
    sum += ((2.0 * mx * my + kSsimC1) * (2.0 * cxy + kSsimC2)) /
           ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
  }
  const double mean_ssim = sum / static_cast<double>(mu_x.size());
  return std::clamp(1.0 - mean_ssim, 0.0, 1.0);
}

double mae_loss(const MaskPair& pair) { return mae(pair).value; }

double iou_loss(const MaskPair& pair) {
  const auto p = pair.prediction().values();
  const auto g = pair.ground_truth().values();
  // Both sums are scaled by 255^2, so the ratio is one exact-integer division.
  std::uint64_t inter = 0;
  std::uint64_t uni = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::uint64_t pv = p[i];
    const std::uint64_t gv = g[i];
    inter += pv * gv;
    uni += 255 * pv + 255 * gv - pv * gv;
  }
  if (uni == 0) throw Error(ErrorCode::BothEmpty, "soft IoU undefined for two empty masks");
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

double bce_score(const MaskPair& pair) {
  std::array<double, 256> log_p{};
  std::array<double, 256> log_q{};
  for (int v = 0; v < 256; ++v) {
    const double prob = v / 255.0;
    log_p[static_cast<std::size_t>(v)] = std::log(prob + kBceEpsilon);
    log_q[static_cast<std::size_t>(v)] = std::log(1.0 - prob + kBceEpsilon);
  }
  const auto p = pair.prediction().values();
  const auto g = pair.ground_truth().values();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double target = g[i] / 255.0;
    sum += target * log_p[p[i]] + (1.0 - target) * log_q[p[i]];
  }
  return std::max(0.0, -sum / static_cast<double>(p.size()));
}

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "maps must be non-empty and of equal length");
  }
}

}  // namespace

double iou_loss(std::span<const double> prediction, std::span<const double> target) {
  require_same_length(prediction, target);
  double inter = 0.0;
  double uni = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double pg = prediction[i] * target[i];
    inter += pg;
    uni += prediction[i] + target[i] - pg;
  }
  if (uni == 0.0) throw Error(ErrorCode::BothEmpty, "soft IoU undefined for two empty masks");
  return 1.0 - inter / uni;
}

double bce_score(std::span<const double> prediction, std::span<const double> target) {
  require_same_length(prediction, target);
  double sum = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    sum += target[i] * std::log(prediction[i] + kBceEpsilon) +
           (1.0 - target[i]) * std::log(1.0 - prediction[i] + kBceEpsilon);
  }
  return std::max(0.0, -sum / static_cast<double>(prediction.size()));
}

LossBreakdown composite_loss(const MaskPair& pair, const LossWeights& weights) {
  weights.validate();
  LossBreakdown out;
  out.ssim = ssim_loss(pair);
  out.mae = mae_loss(pair);
  out.iou = iou_loss(pair);
  out.bce = bce_score(pair);
  out.total = weights.ssim * out.ssim + weights.mae * out.mae + weights.iou * out.iou;
  return out;
}

}  // namespace toonbench
