#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "toonbench/dataset.hpp"
#include "toonbench/metrics.hpp"

namespace toonbench {

/// A named prediction directory as given on the command line (NAME=DIR).
struct ModelSpec {
  std::string name;
  std::filesystem::path prediction_dir;
};

ModelSpec parse_model_spec(const std::string& text);

/// Predictions matched to manifest records by file stem == record id.
struct ModelRun {
  std::string model_name;
  std::filesystem::path prediction_dir;
  std::vector<std::pair<const DatasetRecord*, std::filesystem::path>> resolved;
  std::vector<std::string> missing;  // record ids without a prediction file
};

/// Throws AmbiguousPrediction when several files share a record's stem.
ModelRun resolve_run(const ModelSpec& spec, const DatasetManifest& manifest,
                     std::optional<Split> split);

/// Per-image results keyed by content hashes of both masks and the
/// evaluation settings. Safe for concurrent use.
class ScoreCache {
 public:
  std::optional<std::vector<MetricResult>> find(const std::string& key) const;
  void insert(const std::string& key, std::vector<MetricResult> results);
  std::size_t size() const;

  static std::string key_for(const MaskPair& pair, const EvaluationConfig& cfg);

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::vector<MetricResult>> entries_;
};

struct ImageScore {
  std::string record_id;
  Category category;
  std::vector<MetricResult> metrics;  // kReportOrder

  std::optional<double> value(MetricId id) const;
};

struct MetricSummary {
  std::optional<double> mean;  // over images where the metric was defined
  std::size_t scored = 0;
  std::size_t absent = 0;
};

struct MetricReport {
  std::string model_name;
  std::optional<Category> scope;  // nullopt = overall
  std::size_t image_count = 0;
  std::array<MetricSummary, kReportOrder.size()> per_metric{};
  std::vector<ImageScore> per_image;

  const MetricSummary& summary(MetricId id) const;
};

std::size_t report_index(MetricId id);

struct BenchmarkOptions {
  EvaluationConfig eval;
  std::optional<Split> split = Split::Test;  // nullopt evaluates every record
  bool allow_missing = false;
  int jobs = 1;
  std::shared_ptr<ScoreCache> cache;  // optional
};

/// Scores every resolved pair, then reduces per model: one overall report
/// followed by one per category present, categories in canonical order.
/// Missing predictions throw MissingPrediction unless allow_missing, in which
/// case they are reported through `warnings`. Throws NoPairsResolved when a
/// model matches nothing, ManifestInvalid on duplicate ids or unreadable
/// ground truth.
std::vector<MetricReport> run_benchmark(const DatasetManifest& manifest,
                                        const std::vector<ModelSpec>& models,
                                        const BenchmarkOptions& options,
                                        std::vector<std::string>* warnings = nullptr);

/// Reduction step on its own: per-image scores of one model into reports.
std::vector<MetricReport> aggregate(const std::string& model_name,
                                    const std::vector<ImageScore>& images);

struct CheckpointSelection {
  std::string model_name;
  std::vector<MetricReport> reports;
};

/// Evaluates the candidates on the validation split and picks the best
/// overall mean for `criterion`. Ties go to the alphabetically first name.
CheckpointSelection select_checkpoint(const std::vector<ModelSpec>& candidates,
                                      const DatasetManifest& manifest, MetricId criterion,
                                      BenchmarkOptions options = {});

/// Selection step on its own, over already computed reports.
std::string best_model(const std::vector<MetricReport>& reports, MetricId criterion);

}  // namespace toonbench
