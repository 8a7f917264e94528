#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toonbench/bench.hpp"

namespace toonbench {

enum class ReportFormat { Markdown, Csv, Json };

std::optional<ReportFormat> parse_report_format(std::string_view name);

struct RenderOptions {
  // Display multiplier for MAE and MSE in markdown (raw values are in [0,1]).
  double error_scale = 1.0;
};

/// Markdown: an overall table (one row per model) and, when category
/// reports are present, a per-category table; best value per column and
/// scope is bolded, ties included. CSV and JSON carry every per-image value
/// at full precision. Throws EmptyReports.
std::string render_report(const std::vector<MetricReport>& reports, ReportFormat format,
                          const RenderOptions& options = {});

std::string_view metric_title(MetricId id);

/// Shortest round-trip decimal form.
std::string format_number(double value);

}  // namespace toonbench
