#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace toonbench {

enum class Category { Reference, Emotion, Pose, Factory, Action, Items };

inline constexpr std::array<Category, 6> kAllCategories = {
    Category::Reference, Category::Emotion, Category::Pose,
    Category::Factory,   Category::Action,  Category::Items};

std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view name);

enum class Split { Train, Validation, Test };

std::string_view split_name(Split s);
std::optional<Split> parse_split(std::string_view name);

struct DatasetRecord {
  std::string id;
  std::filesystem::path image;  // relative to the manifest directory unless absolute
  std::filesystem::path mask;
  Category category = Category::Reference;
  std::optional<Split> split;

  bool operator==(const DatasetRecord&) const = default;
};

struct DatasetManifest {
  std::vector<DatasetRecord> records;
  std::optional<std::uint64_t> seed;
  std::filesystem::path base_dir;  // directory the record paths are relative to

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
  }
  std::vector<const DatasetRecord*> records_in(std::optional<Split> split) const;
};

inline constexpr int kManifestVersion = 1;

/// Manifest files are UTF-8 JSON: {"version": 1, "seed": S|null,
/// "records": [{"id", "image", "mask", "category", "split"?}]}.
/// Malformed documents throw ManifestInvalid.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::string_view json_text, std::filesystem::path base_dir);
std::string manifest_to_json(const DatasetManifest& manifest);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

// ---- splitting -------------------------------------------------------------

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;

  bool operator==(const SplitCounts&) const = default;
};

/// train = floor(0.8 n), validation = round-half-up(0.1 n), test = remainder.
SplitCounts split_counts(std::size_t n);

/// Stratified per-category shuffle. Membership depends only on the record
/// ids and the seed, never on input order. Throws AlreadySplit if any record
/// carries a split, EmptyCategory if there is nothing to split.
DatasetManifest assign_splits(const DatasetManifest& manifest, std::uint64_t seed);

std::map<Category, SplitCounts> count_splits(const DatasetManifest& manifest);

// ---- curation --------------------------------------------------------------

struct CurationPolicy {
  double easy_score_threshold = 0.99;  // baseline score at or above this is "easy"
  double easy_fraction = 0.20;         // cap on easy examples, as a fraction of target
  std::size_t target_size = 1;

  void validate() const;
  std::size_t easy_cap() const;
};

struct ScoredRecord {
  DatasetRecord record;
  double baseline_score = 0.0;
};

struct CurationResult {
  std::vector<DatasetRecord> selected;  // hard examples first, each group ascending by score
  std::size_t hard_count = 0;
  std::size_t easy_count = 0;
  bool short_of_target = false;
};

/// A manifest document whose records each carry a numeric "score".
std::vector<ScoredRecord> load_scored_records(const std::filesystem::path& path);

/// Hardest-first selection with easy examples filling up to the cap.
/// Ties on score are broken by record id. Throws TargetTooLarge.
CurationResult curate(std::span<const ScoredRecord> scored, const CurationPolicy& policy);

// ---- validation ------------------------------------------------------------

enum class IssueKind {
  MissingFile,
  UndecodableMask,
  UndecodableImage,
  DimensionMismatch,
  DuplicateId,
  EmptyForeground,
  EmptyPath,
};

std::string_view issue_name(IssueKind kind);

struct ManifestIssue {
  IssueKind kind;
  std::string record_id;
  std::string detail;
};

/// Empty result means the manifest is clean. Sorted by record id.
std::vector<ManifestIssue> validate_manifest(const DatasetManifest& manifest);

}  // namespace toonbench
