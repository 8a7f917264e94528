#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "toonbench/bench.hpp"
#include "toonbench/concordance.hpp"
#include "toonbench/dataset.hpp"
#include "toonbench/image_io.hpp"

namespace toonbench {

struct ReviewConfig {
  DatasetManifest manifest;
  std::vector<ModelSpec> models;
  std::filesystem::path rankings_path;
  std::uint64_t seed = 0;
  std::optional<Split> split = Split::Validation;  // nullopt uses every record
  EvaluationConfig eval;                           // for live concordance
};

struct BlindCandidate {
  std::string label;   // "A", "B", ...
  std::string handle;  // opaque asset handle
};

struct RankingTask {
  std::string image_id;
  std::string original_handle;
  std::vector<BlindCandidate> candidates;  // presentation order
  std::size_t remaining = 0;               // uncompleted tasks for this annotator, this one included
};

/// Alpha-composites `image` over a light/dark checkerboard using `alpha`.
/// A fully opaque mask reproduces the image. Throws DimensionMismatch.
RgbImage composite_over_checkerboard(const RgbImage& image, const AlphaMask& alpha,
                                     int cell = 8);

/// State behind the ranking study: a blinded, seeded presentation of every
/// image that all models have predicted, plus an append-only rankings file.
/// Rankings already in the file count as completed, so restarts resume.
class ReviewSession {
 public:
  /// Throws SessionNotInitialized with fewer than two models or no image
  /// predicted by all of them.
  explicit ReviewSession(ReviewConfig config);

  std::optional<RankingTask> next_task(const std::string& annotator_id) const;

  /// Resolves the blind labels, appends the ranking durably and only then
  /// marks the task complete. Throws UnknownTask, LabelMismatch,
  /// DuplicateSubmission; nothing is written on error.
  HumanRanking submit_ranking(const std::string& annotator_id, const std::string& image_id,
                              const std::vector<std::string>& ordered_labels);

  /// PNG bytes for a handle issued by this session. Throws UnknownHandle.
  std::vector<std::uint8_t> serve_asset(const std::string& handle) const;

  /// Agreement over the rankings submitted so far. Throws NoComparablePairs.
  ConcordanceReport live_concordance(TiePolicy tie_policy = TiePolicy::HalfCredit) const;

  std::size_t image_count() const { return order_.size(); }
  std::size_t completed_count(const std::string& annotator_id) const;
  std::vector<HumanRanking> rankings() const;

 private:
  struct Asset {
    std::string image_id;
    std::optional<std::size_t> model;  // nullopt: the original image
  };
  struct Entry {
    const DatasetRecord* record = nullptr;
    std::vector<std::filesystem::path> predictions;  // by model index
    std::vector<std::size_t> presentation;           // label i -> model index
    std::string original_handle;
    std::vector<std::string> candidate_handles;  // by model index
  };

  RankingTask make_task(const Entry& entry, std::size_t remaining) const;
  void append_durably(const std::string& line);
  const std::map<MetricId, double>& scores_for(const std::string& image_id,
                                               std::size_t model) const;

  ReviewConfig config_;
  std::vector<std::string> order_;
  std::map<std::string, Entry> entries_;
  std::map<std::string, Asset> assets_;

  mutable std::shared_mutex state_mutex_;
  std::set<std::pair<std::string, std::string>> completed_;  // (annotator, image)
  std::vector<HumanRanking> rankings_;
  std::mutex write_mutex_;

  mutable std::mutex score_mutex_;
  mutable std::map<std::pair<std::string, std::size_t>, std::map<MetricId, double>> scores_;
};

/// JSON-over-HTTP front end for a session:
///   GET  /api/task?annotator=ID
///   POST /api/ranking      {"annotatorId","imageId","ordering":[labels]}
///   GET  /api/asset/HANDLE
///   GET  /api/concordance
/// and static files under `/` from `ui_dir` (a placeholder page otherwise).
class ReviewServer {
 public:
  explicit ReviewServer(ReviewSession& session, std::optional<std::filesystem::path> ui_dir = {});
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  /// Binds, returning the bound port (port 0 picks a free one). Throws IoError.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace toonbench
