#include "toonbench/metrics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "toonbench/morphology.hpp"

namespace toonbench {

namespace {

// Division guard for the alignment/structure/weighted-F ratios.
constexpr double kEps = DBL_EPSILON;

// Weighted F-measure constants.
constexpr int kWfKernelRadius = 3;  // 7x7
constexpr double kWfKernelSigma = 5.0;
constexpr double kWfDecay = -0.13862943611198905;  // ln(0.5) / 5

constexpr double kStructureAlpha = 0.5;

using Int128 = __int128;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void require_foreground(std::size_t count, std::string_view metric) {
  if (count == 0) {
    throw Error(ErrorCode::EmptyForeground,
                std::string(metric) + " needs a ground truth with foreground pixels");
  }
}

}  // namespace

std::string_view metric_name(MetricId id) {
  switch (id) {
    case MetricId::PA: return "PA";
    case MetricId::BIoU: return "BIoU";
    case MetricId::WF: return "WF";
    case MetricId::F: return "F";
    case MetricId::E: return "E";
    case MetricId::S: return "S";
    case MetricId::MAE: return "MAE";
    case MetricId::MSE: return "MSE";
  }
  return "?";
}

std::optional<MetricId> parse_metric_id(std::string_view name) {
  for (MetricId id : kReportOrder) {
    if (metric_name(id) == name) return id;
  }
  return std::nullopt;
}

Direction direction_of(MetricId id) {
  return (id == MetricId::MAE || id == MetricId::MSE) ? Direction::LowerBetter
                                                        : Direction::HigherBetter;
}

bool is_better(MetricId id, double a, double b) {
  return direction_of(id) == Direction::HigherBetter ? a > b : a < b;
}

void PixelAccuracyConfig::validate() const {
  if (delta < 0 || delta > 255) throw Error(ErrorCode::InvalidArgument, "delta must be in [0,255]");
  if (foreground_threshold < 0 || foreground_threshold > 255) {
    throw Error(ErrorCode::InvalidArgument, "foreground threshold must be in [0,255]");
  }
  if (erosion_iterations < 0) {
    throw Error(ErrorCode::InvalidArgument, "erosion iterations must be >= 0");
  }
}

PixelAccuracyBreakdown pixel_accuracy(const MaskPair& pair, const PixelAccuracyConfig& cfg) {
  cfg.validate();
  const auto p = pair.prediction().values();
  const auto g = pair.ground_truth().values();
  std::vector<std::uint8_t> wrong(p.size());
  std::size_t foreground = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    wrong[i] = std::abs(int{p[i]} - int{g[i]}) > cfg.delta ? 1 : 0;
    foreground += g[i] > cfg.foreground_threshold ? 1 : 0;
  }
  require_foreground(foreground, "pixel accuracy");

  const BinaryMask errors(pair.width(), pair.height(), std::move(wrong));
  const BinaryMask eroded =
      erode(errors, {ElementShape::Square3x3, OutOfBounds::AsBackground}, cfg.erosion_iterations);

  PixelAccuracyBreakdown out;
  out.incorrect_pixels = eroded.count();
  out.foreground_pixels = foreground;
  // ((fg - wrong) / fg)^2 as a single division of exact integers.
  const auto correct = static_cast<std::int64_t>(foreground) -
                       static_cast<std::int64_t>(std::min(out.incorrect_pixels, foreground));
  const auto fg = static_cast<std::int64_t>(foreground);
  out.score = static_cast<double>(correct * correct) / static_cast<double>(fg * fg);
  return out;
}

MetricValue mae(const MaskPair& pair) {
  const auto p = pair.prediction().values();
  const auto g = pair.ground_truth().values();
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    total += static_cast<std::uint64_t>(std::abs(int{p[i]} - int{g[i]}));
  }
  const double value = static_cast<double>(total) / (255.0 * static_cast<double>(p.size()));
  return {MetricId::MAE, value, Direction::LowerBetter};
}

MetricValue mse(const MaskPair& pair) {
  const auto p = pair.prediction().values();
  const auto g = pair.ground_truth().values();
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int d = int{p[i]} - int{g[i]};
    total += static_cast<std::uint64_t>(d * d);
  }
  const double value = static_cast<double>(total) / (65025.0 * static_cast<double>(p.size()));
  return {MetricId::MSE, value, Direction::LowerBetter};
}

// ---- threshold sweeps ----------------------------------------------------------

namespace {

struct SplitHistogram {
  std::array<std::uint64_t, 256> positive{};  // prediction values where gt is foreground
  std::array<std::uint64_t, 256> negative{};
  std::uint64_t foreground = 0;
  std::uint64_t total = 0;
};

SplitHistogram split_histogram(const MaskPair& pair) {
  SplitHistogram h;
  const auto p = pair.prediction().values();
  const auto g = pair.ground_truth().values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (g[i] > kDefaultForegroundThreshold) {
      ++h.positive[p[i]];
      ++h.foreground;
    } else {
      ++h.negative[p[i]];
    }
  }
  h.total = p.size();
  return h;
}

// Counts of predicted-positive pixels (value > t) per threshold t.
struct SweepCounts {
  std::array<std::uint64_t, 256> tp{};
  std::array<std::uint64_t, 256> fp{};
};

SweepCounts sweep(const SplitHistogram& h) {
  SweepCounts s;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (int t = 255; t >= 0; --t) {
    s.tp[static_cast<std::size_t>(t)] = tp;
    s.fp[static_cast<std::size_t>(t)] = fp;
    tp += h.positive[static_cast<std::size_t>(t)];
    fp += h.negative[static_cast<std::size_t>(t)];
  }
  return s;
}

double collapse(const std::array<double, 256>& curve, ThresholdStatistic stat) {
  if (stat == ThresholdStatistic::Max) return *std::max_element(curve.begin(), curve.end());
  double sum = 0.0;
  for (double v : curve) sum += v;
  return sum / 256.0;
}

}  // namespace

std::array<double, 256> f_measure_curve(const MaskPair& pair) {
  const SplitHistogram h = split_histogram(pair);
  require_foreground(h.foreground, "F-measure");
  const SweepCounts s = sweep(h);
  std::array<double, 256> curve{};
  for (std::size_t t = 0; t < 256; ++t) {
    const std::uint64_t tp = s.tp[t];
    if (tp == 0) continue;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + s.fp[t]);
    const double recall = static_cast<double>(tp) / static_cast<double>(h.foreground);
    curve[t] = (1.0 + kFBetaSquared) * precision * recall / (kFBetaSquared * precision + recall);
  }
  return curve;
}

MetricValue f_measure(const MaskPair& pair, ThresholdStatistic stat) {
  return {MetricId::F, collapse(f_measure_curve(pair), stat), Direction::HigherBetter};
}

std::array<double, 256> e_measure_curve(const MaskPair& pair) {
  const SplitHistogram h = split_histogram(pair);
  const SweepCounts s = sweep(h);
  const auto n = static_cast<double>(h.total);
  std::array<double, 256> curve{};
  for (std::size_t t = 0; t < 256; ++t) {
    const std::uint64_t tp = s.tp[t];
    const std::uint64_t fp = s.fp[t];
    const std::uint64_t predicted = tp + fp;
    if (h.foreground == 0) {
      curve[t] = static_cast<double>(h.total - predicted) / n;
      continue;
    }
    if (h.foreground == h.total) {
      curve[t] = static_cast<double>(predicted) / n;
      continue;
    }
    const double mean_pred = static_cast<double>(predicted) / n;
    const double mean_gt = static_cast<double>(h.foreground) / n;
    // Four (pred bit, gt bit) classes share one enhanced value each.
    const std::uint64_t counts[2][2] = {
        {h.total - h.foreground - fp, h.foreground - tp},  // pred 0: gt 0, gt 1
        {fp, tp}};                                         // pred 1: gt 0, gt 1
    double sum = 0.0;
    for (int b = 0; b < 2; ++b) {
      for (int gbit = 0; gbit < 2; ++gbit) {
        const std::uint64_t c = counts[b][gbit];
        if (c == 0) continue;
        const double dp = b - mean_pred;
        const double dg = gbit - mean_gt;
        const double align = 2.0 * dp * dg / (dp * dp + dg * dg + kEps);
        const double enhanced = (align + 1.0) * (align + 1.0) / 4.0;
        sum += static_cast<double>(c) * enhanced;
      }
    }
    curve[t] = sum / n;
  }
  return curve;
}

MetricValue e_measure(const MaskPair& pair, ThresholdStatistic stat) {
  return {MetricId::E, clamp01(collapse(e_measure_curve(pair), stat)), Direction::HigherBetter};
}

// ---- S-measure --------------------------------------------------------------------

namespace {

// Similarity of a region's values to an ideal all-ones region, from mean and
// sample standard deviation. Inputs are integer sums of 8-bit intensities.
double object_similarity(std::uint64_t count, std::uint64_t sum, std::uint64_t sum_sq) {
  const double mean = static_cast<double>(sum) / (255.0 * static_cast<double>(count));
  double sigma = 0.0;
  if (count > 1) {
    const Int128 spread = static_cast<Int128>(count) * sum_sq - static_cast<Int128>(sum) * sum;
    const double variance = static_cast<double>(spread) /
                            (static_cast<double>(count) * static_cast<double>(count - 1) * 65025.0);
    sigma = std::sqrt(std::max(variance, 0.0));
  }
  return 2.0 * mean / (mean * mean + 1.0 + sigma + kEps);
}

struct AxisSplit {
  // Weight of each coordinate on the low side, in halves: 0, 1 or 2.
  std::vector<int> low_halves;
  int low_area_halves = 0;  // sum of low_halves
};

// Splits an axis of `length` at the rounded foreground centroid (pixel
// centres at i + 0.5). When the centroid falls exactly on a pixel centre
// that pixel is shared half/half, which keeps the split mirror-symmetric.
AxisSplit split_axis(int length, std::uint64_t coord_sum, std::uint64_t count) {
  const std::uint64_t numerator = 2 * coord_sum + count;  // 2 * count * centroid
  const std::uint64_t boundary = (numerator + count) / (2 * count);
  const bool shared = (numerator + count) % (2 * count) == 0;
  AxisSplit s;
  s.low_halves.assign(static_cast<std::size_t>(length), 0);
  for (int i = 0; i < length; ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    if (shared && u + 1 == boundary) {
      s.low_halves[static_cast<std::size_t>(i)] = 1;
    } else if (u < boundary) {
      s.low_halves[static_cast<std::size_t>(i)] = 2;
    }
    s.low_area_halves += s.low_halves[static_cast<std::size_t>(i)];
  }
  return s;
}

struct WeightedSums {
  std::int64_t weight = 0;
  std::int64_t pred = 0;
  std::int64_t pred_sq = 0;
  std::int64_t gt = 0;
  std::int64_t cross = 0;
};

double structural_similarity(const WeightedSums& s) {
  const Int128 w = s.weight;
  const Int128 nxx = w * s.pred_sq - static_cast<Int128>(s.pred) * s.pred;
  const Int128 nyy = w * s.gt - static_cast<Int128>(s.gt) * s.gt;
  const Int128 nxy = w * s.cross - static_cast<Int128>(s.pred) * s.gt;

  const bool alpha_zero = s.pred == 0 || s.gt == 0 || nxy == 0;
  if (alpha_zero) {
    const bool beta_zero = (s.pred == 0 && s.gt == 0) || (nxx == 0 && nyy == 0);
    return beta_zero ? 1.0 : 0.0;
  }
  const double wd = static_cast<double>(s.weight);
  const double x = static_cast<double>(s.pred) / (255.0 * wd);
  const double y = static_cast<double>(s.gt) / wd;
  const double sigma_x = static_cast<double>(nxx) / (wd * wd * 65025.0);
  const double sigma_y = static_cast<double>(nyy) / (wd * wd);
  const double sigma_xy = static_cast<double>(nxy) / (wd * wd * 255.0);
  // alpha != 0 here, and |alpha| <= beta, so beta is strictly positive.
  const double alpha = 4.0 * x * y * sigma_xy;
  const double beta = (x * x + y * y) * (sigma_x + sigma_y);
  return alpha / beta;
}

}  // namespace

MetricValue s_measure(const MaskPair& pair) {
  const int w = pair.width();
  const int h = pair.height();
  const auto p = pair.prediction().values();
  const auto g = pair.ground_truth().values();
  const std::uint64_t n = p.size();

  std::uint64_t fg_count = 0, fg_sum = 0, fg_sq = 0;
  std::uint64_t bg_sum = 0, bg_sq = 0;  // of (255 - pred)
  std::uint64_t pred_sum = 0, x_sum = 0, y_sum = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const std::uint64_t v = p[i];
      pred_sum += v;
      if (g[i] > kDefaultForegroundThreshold) {
        ++fg_count;
        fg_sum += v;
        fg_sq += v * v;
        x_sum += static_cast<std::uint64_t>(x);
        y_sum += static_cast<std::uint64_t>(y);
      } else {
        bg_sum += 255 - v;
        bg_sq += (255 - v) * (255 - v);
      }
    }
  }
  const double mean_pred = static_cast<double>(pred_sum) / (255.0 * static_cast<double>(n));
  if (fg_count == 0) return {MetricId::S, clamp01(1.0 - mean_pred), Direction::HigherBetter};
  if (fg_count == n) return {MetricId::S, clamp01(mean_pred), Direction::HigherBetter};

  const double fg_fraction = static_cast<double>(fg_count) / static_cast<double>(n);
  const double object = fg_fraction * object_similarity(fg_count, fg_sum, fg_sq) +
                        (1.0 - fg_fraction) * object_similarity(n - fg_count, bg_sum, bg_sq);

  const AxisSplit cols = split_axis(w, x_sum, fg_count);
  const AxisSplit rows = split_axis(h, y_sum, fg_count);
  // Quadrants: 0 = top-left, 1 = top-right, 2 = bottom-left, 3 = bottom-right.
  std::array<WeightedSums, 4> quad{};
  for (int y = 0; y < h; ++y) {
    const int top = rows.low_halves[static_cast<std::size_t>(y)];
    const int row_w[2] = {top, 2 - top};
    for (int x = 0; x < w; ++x) {
      const int left = cols.low_halves[static_cast<std::size_t>(x)];
      const int col_w[2] = {left, 2 - left};
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const std::int64_t v = p[i];
      const std::int64_t gv = g[i] > kDefaultForegroundThreshold ? 1 : 0;
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          const std::int64_t wt = row_w[r] * col_w[c];
          if (wt == 0) continue;
          WeightedSums& q = quad[static_cast<std::size_t>(2 * r + c)];
          q.weight += wt;
          q.pred += wt * v;
          q.pred_sq += wt * v * v;
          q.gt += wt * gv;
          q.cross += wt * v * gv;
        }
      }
    }
  }
  const double total_quarters = 4.0 * static_cast<double>(n);
  double region = 0.0;
  for (const WeightedSums& q : quad) {
    if (q.weight == 0) continue;
    region += static_cast<double>(q.weight) / total_quarters * structural_similarity(q);
  }
  const double score = kStructureAlpha * object + (1.0 - kStructureAlpha) * region;
  return {MetricId::S, clamp01(score), Direction::HigherBetter};
}

// ---- weighted F-measure ------------------------------------------------------------

namespace {

std::array<double, (2 * kWfKernelRadius + 1) * (2 * kWfKernelRadius + 1)> gaussian_kernel() {
  std::array<double, (2 * kWfKernelRadius + 1) * (2 * kWfKernelRadius + 1)> k{};
  double total = 0.0;
  std::size_t i = 0;
  for (int dy = -kWfKernelRadius; dy <= kWfKernelRadius; ++dy) {
    for (int dx = -kWfKernelRadius; dx <= kWfKernelRadius; ++dx) {
      k[i] = std::exp(-(dx * dx + dy * dy) / (2.0 * kWfKernelSigma * kWfKernelSigma));
      total += k[i++];
    }
  }
  for (double& v : k) v /= total;
  return k;
}

// Lattice offsets (dx, dy) grouped by squared length, up to the largest
// squared distance a smoothing window can reach (2 * radius^2).
constexpr int kMaxTieSquared = 2 * kWfKernelRadius * kWfKernelRadius;

std::vector<std::vector<std::pair<int, int>>> offsets_by_squared_length() {
  std::vector<std::vector<std::pair<int, int>>> table(kMaxTieSquared + 1);
  int reach = 0;
  while ((reach + 1) * (reach + 1) <= kMaxTieSquared) ++reach;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      const int d2 = dx * dx + dy * dy;
      if (d2 >= 1 && d2 <= kMaxTieSquared) table[static_cast<std::size_t>(d2)].emplace_back(dx, dy);
    }
  }
  return table;
}

}  // namespace

MetricValue weighted_f_measure(const MaskPair& pair) {
  const int w = pair.width();
  const int h = pair.height();
  const BinaryMask gt = binarize(pair.ground_truth());
  const std::size_t fg_count = gt.count();
  require_foreground(fg_count, "weighted F-measure");

  const auto p = pair.prediction().values();
  const std::size_t n = p.size();
  std::vector<double> error(n);
  for (std::size_t i = 0; i < n; ++i) {
    error[i] = std::abs(p[i] / 255.0 - (gt[i] ? 1.0 : 0.0));
  }

  // Background pixels inherit the error of their nearest foreground pixel.
  // Equidistant foreground pixels resolve to the largest error among them so
  // the result does not depend on image orientation. Only background pixels
  // within the smoothing window of some foreground pixel can affect the
  // score, and those all lie within kMaxTieSquared.
  const DistanceField dist = distance_transform(gt);
  static const auto ties = offsets_by_squared_length();
  std::vector<double> propagated = error;
  for (std::size_t i = 0; i < n; ++i) {
    if (gt[i]) continue;
    const std::int64_t d2 = dist.squared_distance(i);
    if (d2 > kMaxTieSquared) {
      propagated[i] = error[dist.nearest_index(i)];
      continue;
    }
    const int x = static_cast<int>(i % static_cast<std::size_t>(w));
    const int y = static_cast<int>(i / static_cast<std::size_t>(w));
    double worst = 0.0;
    for (const auto& [dx, dy] : ties[static_cast<std::size_t>(d2)]) {
      const int sx = x + dx;
      const int sy = y + dy;
      if (sx < 0 || sy < 0 || sx >= w || sy >= h || !gt.at(sx, sy)) continue;
      worst = std::max(worst, error[static_cast<std::size_t>(sy) * w + sx]);
    }
    propagated[i] = worst;
  }

  static const auto kernel = gaussian_kernel();
  double fg_weighted_error = 0.0;
  double bg_weighted_error = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!gt[i]) {
        const double importance = 2.0 - std::exp(kWfDecay * dist.distance(i));
        bg_weighted_error += error[i] * importance;
        continue;
      }
      // Zero-padded correlation with the Gaussian window.
      double smoothed = 0.0;
      std::size_t k = 0;
      for (int dy = -kWfKernelRadius; dy <= kWfKernelRadius; ++dy) {
        for (int dx = -kWfKernelRadius; dx <= kWfKernelRadius; ++dx, ++k) {
          const int sx = x + dx;
          const int sy = y + dy;
          if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
          smoothed += kernel[k] * propagated[static_cast<std::size_t>(sy) * w + sx];
        }
      }
      fg_weighted_error += std::min(error[i], smoothed);
    }
  }

  const double fg = static_cast<double>(fg_count);
  const double tp = fg - fg_weighted_error;
  const double recall = 1.0 - fg_weighted_error / fg;
  const double precision = tp / (kEps + tp + bg_weighted_error);
  const double beta2 = kWeightedFBetaSquared;
  const double q = (1.0 + beta2) * recall * precision / (kEps + recall + beta2 * precision);
  return {MetricId::WF, clamp01(q), Direction::HigherBetter};
}

// ---- Boundary IoU ---------------------------------------------------------------

int boundary_radius(int width, int height, double dilation_ratio) {
  const double diagonal = std::sqrt(static_cast<double>(width) * width +
                                    static_cast<double>(height) * height);
  return std::max(1, static_cast<int>(std::lround(dilation_ratio * diagonal)));
}

MetricValue boundary_iou(const MaskPair& pair, double dilation_ratio) {
  if (!(dilation_ratio >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "dilation ratio must be non-negative");
  }
  const int radius = boundary_radius(pair.width(), pair.height(), dilation_ratio);
  const BinaryMask gt_band = boundary_band(binarize(pair.ground_truth()), radius);
  const BinaryMask pred_band = boundary_band(binarize(pair.prediction()), radius);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < gt_band.size(); ++i) {
    inter += (gt_band[i] && pred_band[i]) ? 1 : 0;
    uni += (gt_band[i] || pred_band[i]) ? 1 : 0;
  }
  if (uni == 0) throw Error(ErrorCode::EmptyBands, "both boundary bands are empty");
  return {MetricId::BIoU, static_cast<double>(inter) / static_cast<double>(uni),
          Direction::HigherBetter};
}

// ---- suite ----------------------------------------------------------------------

std::vector<MetricResult> evaluate_all(const MaskPair& pair, const EvaluationConfig& cfg) {
  std::vector<MetricResult> out;
  out.reserve(kReportOrder.size());
  for (MetricId id : kReportOrder) {
    MetricResult slot{id, std::nullopt, std::nullopt};
    try {
      switch (id) {
        case MetricId::PA: slot.value = pixel_accuracy(pair, cfg.pixel_accuracy).score; break;
        case MetricId::BIoU:
          slot.value = boundary_iou(pair, cfg.boundary_dilation_ratio).value;
          break;
        case MetricId::WF: slot.value = weighted_f_measure(pair).value; break;
        case MetricId::E: slot.value = e_measure(pair, cfg.threshold_statistic).value; break;
        case MetricId::S: slot.value = s_measure(pair).value; break;
        case MetricId::MAE: slot.value = mae(pair).value; break;
        case MetricId::F: slot.value = f_measure(pair, cfg.threshold_statistic).value; break;
        case MetricId::MSE: slot.value = mse(pair).value; break;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidArgument) throw;
      slot.absent_reason = e.code();
    }
    out.push_back(slot);
  }
  return out;
}

}  // namespace toonbench
