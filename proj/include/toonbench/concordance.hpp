#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toonbench/metrics.hpp"

namespace toonbench {

/// One annotator's strict best-to-worst ordering of model outputs for one image.
struct HumanRanking {
  std::string image_id;
  std::string annotator_id;
  std::vector<std::string> ordering;
  std::string timestamp;  // UTC, ISO-8601 with trailing Z

  /// Throws InvalidArgument on duplicates or fewer than two entries.
  void validate() const;
  bool operator==(const HumanRanking&) const = default;
};

/// image id -> model name -> metric -> score
using ScoreTable = std::map<std::string, std::map<std::string, std::map<MetricId, double>>>;

enum class TiePolicy { HalfCredit, Disagree };

std::string_view tie_policy_name(TiePolicy p);
std::optional<TiePolicy> parse_tie_policy(std::string_view name);

struct ConcordanceReport {
  std::map<MetricId, double> agreement;  // credited pairs / comparable pairs
  std::map<MetricId, double> credited;   // whole pairs plus half credits
  std::size_t comparable_pairs = 0;
  std::size_t dropped_pairs = 0;  // pairs lacking a score for some metric
  TiePolicy tie_policy = TiePolicy::HalfCredit;
};

/// Expands every ordering into its C(k,2) preferred/less-preferred pairs and
/// counts, per metric, the pairs on which the metric agrees (direction-aware,
/// exact comparison). A pair is comparable only if every requested metric
/// has a score for both models; all metrics share one denominator.
/// Throws NoComparablePairs.
ConcordanceReport compute_concordance(std::span<const HumanRanking> rankings,
                                      const ScoreTable& scores, TiePolicy tie_policy,
                                      std::span<const MetricId> metrics = kReportOrder);

/// Metric ids by agreement, highest first; ties alphabetical.
std::vector<MetricId> rank_metrics(const ConcordanceReport& report);

// Rankings file: append-only JSONL, one object per line with
// imageId, annotatorId, ordering, timestamp.
std::string ranking_to_json_line(const HumanRanking& ranking);
HumanRanking parse_ranking_line(std::string_view line);
std::vector<HumanRanking> load_rankings(const std::filesystem::path& path);

std::string utc_timestamp_now();

std::string concordance_to_json(const ConcordanceReport& report);

}  // namespace toonbench
