#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toonbench/error.hpp"
#include "toonbench/mask.hpp"

namespace toonbench {

enum class MetricId { PA, BIoU, WF, F, E, S, MAE, MSE };
enum class Direction { HigherBetter, LowerBetter };

/// Column order of the published comparison table, with MSE appended.
inline constexpr std::array<MetricId, 8> kReportOrder = {
    MetricId::PA, MetricId::BIoU, MetricId::WF,  MetricId::E,
    MetricId::S,  MetricId::MAE,  MetricId::F,   MetricId::MSE};

std::string_view metric_name(MetricId id);
std::optional<MetricId> parse_metric_id(std::string_view name);
Direction direction_of(MetricId id);

/// True when `a` is strictly better than `b` for this metric.
bool is_better(MetricId id, double a, double b);

struct MetricValue {
  MetricId id;
  double value;
  Direction direction;
};

// ---- Pixel Accuracy ----------------------------------------------------------

struct PixelAccuracyConfig {
  int delta = 10;                 // a pixel is wrong when |pred - gt| > delta
  int foreground_threshold = 128;  // gt foreground is value > threshold
  int erosion_iterations = 1;

  void validate() const;
};

struct PixelAccuracyBreakdown {
  std::size_t incorrect_pixels = 0;  // after erosion
  std::size_t foreground_pixels = 0;
  double score = 0.0;                // (max(0, 1 - incorrect/foreground))^2
};

/// Error mask |pred - gt| > delta, eroded with a 3x3 square (image frame
/// counts as background), normalised by the ground-truth foreground area.
/// Throws EmptyForeground when the ground truth has no foreground pixel.
PixelAccuracyBreakdown pixel_accuracy(const MaskPair& pair, const PixelAccuracyConfig& cfg = {});

// ---- Region / pixel metrics --------------------------------------------------

MetricValue mae(const MaskPair& pair);
MetricValue mse(const MaskPair& pair);

/// How the per-threshold curve of F and E is collapsed to one number.
enum class ThresholdStatistic { Max, Mean };

inline constexpr double kFBetaSquared = 0.3;
inline constexpr double kWeightedFBetaSquared = 1.0;

/// Sweeps thresholds 0..255 on the prediction (bit set iff value > t).
/// Throws EmptyForeground when the binarised ground truth is empty.
MetricValue f_measure(const MaskPair& pair, ThresholdStatistic stat = ThresholdStatistic::Max);

/// Per-threshold F-beta values, index = threshold.
std::array<double, 256> f_measure_curve(const MaskPair& pair);

MetricValue weighted_f_measure(const MaskPair& pair);

MetricValue e_measure(const MaskPair& pair, ThresholdStatistic stat = ThresholdStatistic::Max);
std::array<double, 256> e_measure_curve(const MaskPair& pair);

MetricValue s_measure(const MaskPair& pair);

inline constexpr double kDefaultBoundaryDilationRatio = 0.02;

/// Band radius max(1, round(ratio * image diagonal)).
int boundary_radius(int width, int height, double dilation_ratio);

/// Throws EmptyBands when neither mask has a boundary band.
MetricValue boundary_iou(const MaskPair& pair,
                         double dilation_ratio = kDefaultBoundaryDilationRatio);

// ---- Whole suite ---------------------------------------------------------------

struct EvaluationConfig {
  PixelAccuracyConfig pixel_accuracy;
  double boundary_dilation_ratio = kDefaultBoundaryDilationRatio;
  ThresholdStatistic threshold_statistic = ThresholdStatistic::Max;
};

/// A metric slot that is either a value or the reason it is absent.
struct MetricResult {
  MetricId id;
  std::optional<double> value;
  std::optional<ErrorCode> absent_reason;
};

/// All eight metrics in kReportOrder. A failing metric becomes an absent
/// slot carrying its error code; the call itself never throws on data.
std::vector<MetricResult> evaluate_all(const MaskPair& pair, const EvaluationConfig& cfg = {});

}  // namespace toonbench
