#include "toonbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "detail/random.hpp"
#include "toonbench/error.hpp"
#include "toonbench/image_io.hpp"
#include "toonbench/mask.hpp"

namespace toonbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view category_name(Category c) {
  switch (c) {
    case Category::Reference: return "reference";
    case Category::Emotion: return "emotion";
    case Category::Pose: return "pose";
    case Category::Factory: return "factory";
    case Category::Action: return "action";
    case Category::Items: return "items";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (category_name(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view name) {
  for (Split s : {Split::Train, Split::Validation, Split::Test}) {
    if (split_name(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<const DatasetRecord*> DatasetManifest::records_in(std::optional<Split> split) const {
  std::vector<const DatasetRecord*> out;
  for (const auto& r : records) {
    if (!split || r.split == split) out.push_back(&r);
  }
  return out;
}

// ---- manifest file -----------------------------------------------------------

namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::ManifestInvalid, why); }

std::string require_string(const json& obj, const char* key, std::size_t index) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    invalid("record " + std::to_string(index) + " lacks string field '" + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

DatasetManifest parse_manifest(std::string_view json_text, fs::path base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    invalid(e.what());
  }
  if (!doc.is_object()) invalid("top level must be an object");
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != kManifestVersion) {
    invalid("unsupported or missing version (expected 1)");
  }
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  if (doc.contains("seed") && !doc["seed"].is_null()) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) invalid("seed must be an integer");
    m.seed = doc["seed"].get<std::uint64_t>();
  }
  if (!doc.contains("records") || !doc["records"].is_array()) invalid("records must be an array");
  std::size_t index = 0;
  for (const auto& item : doc["records"]) {
    if (!item.is_object()) invalid("record " + std::to_string(index) + " is not an object");
    DatasetRecord r;
    r.id = require_string(item, "id", index);
    r.image = fs::path(require_string(item, "image", index));
    r.mask = fs::path(require_string(item, "mask", index));
    const std::string category = require_string(item, "category", index);
    const auto parsed = parse_category(category);
    if (!parsed) invalid("record '" + r.id + "' has unknown category '" + category + "'");
    r.category = *parsed;
    if (item.contains("split") && !item["split"].is_null()) {
      if (!item["split"].is_string()) invalid("record '" + r.id + "' split must be a string");
      const auto split = parse_split(item["split"].get<std::string>());
      if (!split) invalid("record '" + r.id + "' has unknown split");
      r.split = split;
    }
    m.records.push_back(std::move(r));
    ++index;
  }
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.parent_path());
}

std::vector<ScoredRecord> load_scored_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  DatasetManifest manifest = parse_manifest(text, path.parent_path());
  const json doc = json::parse(text);
  std::vector<ScoredRecord> out;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& item = doc["records"][i];
    if (!item.contains("score") || !item["score"].is_number()) {
      invalid("record '" + manifest.records[i].id + "' lacks a numeric score");
    }
    out.push_back({std::move(manifest.records[i]), item["score"].get<double>()});
  }
  return out;
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  json doc = json::object();
  doc["version"] = kManifestVersion;
  doc["seed"] = manifest.seed ? json(*manifest.seed) : json(nullptr);
  json records = json::array();
  for (const auto& r : manifest.records) {
    json item = json::object();
    item["id"] = r.id;
    item["image"] = r.image.generic_string();
    item["mask"] = r.mask.generic_string();
    item["category"] = std::string(category_name(r.category));
    if (r.split) item["split"] = std::string(split_name(*r.split));
    records.push_back(std::move(item));
  }
  doc["records"] = std::move(records);
  return doc.dump(2) + "\n";
}

void save_manifest(const fs::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << manifest_to_json(manifest);
}

// ---- splitting -----------------------------------------------------------------

SplitCounts split_counts(std::size_t n) {
  SplitCounts c;
  c.train = (8 * n) / 10;
  c.validation = (n + 5) / 10;
  c.test = n - c.train - c.validation;
  return c;
}

DatasetManifest assign_splits(const DatasetManifest& manifest, std::uint64_t seed) {
  for (const auto& r : manifest.records) {
    if (r.split) throw Error(ErrorCode::AlreadySplit, "record '" + r.id + "' already has a split");
  }
  if (manifest.records.empty()) {
    throw Error(ErrorCode::EmptyCategory, "manifest has no records to split");
  }
  DatasetManifest out = manifest;
  out.seed = seed;
  for (Category c : kAllCategories) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
      if (out.records[i].category == c) members.push_back(i);
    }
    if (members.empty()) continue;
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return out.records[a].id < out.records[b].id;
    });
    auto engine = detail::make_engine(seed, category_name(c));
    detail::shuffle(members, engine);
    const SplitCounts counts = split_counts(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      Split s = Split::Test;
      if (k < counts.train) {
        s = Split::Train;
      } else if (k < counts.train + counts.validation) {
        s = Split::Validation;
      }
      out.records[members[k]].split = s;
    }
  }
  return out;
}

std::map<Category, SplitCounts> count_splits(const DatasetManifest& manifest) {
  std::map<Category, SplitCounts> out;
  for (const auto& r : manifest.records) {
    auto& c = out[r.category];
    if (!r.split) continue;
    switch (*r.split) {
      case Split::Train: ++c.train; break;
      case Split::Validation: ++c.validation; break;
      case Split::Test: ++c.test; break;
    }
  }
  return out;
}

// ---- curation ------------------------------------------------------------------

void CurationPolicy::validate() const {
  if (!(easy_fraction >= 0.0 && easy_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "easy fraction must be in [0,1]");
  }
  if (target_size < 1) throw Error(ErrorCode::InvalidArgument, "target size must be >= 1");
}

std::size_t CurationPolicy::easy_cap() const {
  // Small slack so that e.g. 0.29 * 100 counts as 29 despite binary rounding.
  return static_cast<std::size_t>(
      std::floor(easy_fraction * static_cast<double>(target_size) + 1e-9));
}

CurationResult curate(std::span<const ScoredRecord> scored, const CurationPolicy& policy) {
  policy.validate();
  if (policy.target_size > scored.size()) {
    throw Error(ErrorCode::TargetTooLarge, "target " + std::to_string(policy.target_size) +
                                               " exceeds " + std::to_string(scored.size()) +
                                               " candidates");
  }
  std::vector<const ScoredRecord*> hard;
  std::vector<const ScoredRecord*> easy;
  for (const auto& s : scored) {
    (s.baseline_score < policy.easy_score_threshold ? hard : easy).push_back(&s);
  }
  auto by_score = [](const ScoredRecord* a, const ScoredRecord* b) {
    if (a->baseline_score != b->baseline_score) return a->baseline_score < b->baseline_score;
    return a->record.id < b->record.id;
  };
  std::sort(hard.begin(), hard.end(), by_score);
  std::sort(easy.begin(), easy.end(), by_score);

  CurationResult out;
  out.easy_count = std::min(policy.easy_cap(), easy.size());
  out.hard_count = std::min(hard.size(), policy.target_size - out.easy_count);
  for (std::size_t i = 0; i < out.hard_count; ++i) out.selected.push_back(hard[i]->record);
  for (std::size_t i = 0; i < out.easy_count; ++i) out.selected.push_back(easy[i]->record);
  out.short_of_target = out.selected.size() < policy.target_size;
  return out;
}

// ---- validation ----------------------------------------------------------------

std::string_view issue_name(IssueKind kind) {
  switch (kind) {
    case IssueKind::MissingFile: return "MissingFile";
    case IssueKind::UndecodableMask: return "UndecodableMask";
    case IssueKind::UndecodableImage: return "UndecodableImage";
    case IssueKind::DimensionMismatch: return "DimensionMismatch";
    case IssueKind::DuplicateId: return "DuplicateId";
    case IssueKind::EmptyForeground: return "EmptyForeground";
    case IssueKind::EmptyPath: return "EmptyPath";
  }
  return "?";
}

std::vector<ManifestIssue> validate_manifest(const DatasetManifest& manifest) {
  std::vector<ManifestIssue> issues;
  std::map<std::string, std::size_t> seen;
  for (const auto& r : manifest.records) ++seen[r.id];
  for (const auto& [id, count] : seen) {
    if (count > 1) {
      issues.push_back({IssueKind::DuplicateId, id, std::to_string(count) + " records share this id"});
    }
  }

  for (const auto& r : manifest.records) {
    if (r.id.empty() || r.image.empty() || r.mask.empty()) {
      issues.push_back({IssueKind::EmptyPath, r.id, "id, image and mask must be non-empty"});
      continue;
    }
    const fs::path image = manifest.resolve(r.image);
    const fs::path mask = manifest.resolve(r.mask);
    std::error_code ec;
    bool usable = true;
    for (const auto& p : {image, mask}) {
      if (!fs::is_regular_file(p, ec)) {
        issues.push_back({IssueKind::MissingFile, r.id, p.generic_string()});
        usable = false;
      }
    }
    if (!usable) continue;

    std::optional<ImageSize> image_size;
    try {
      image_size = read_image_size(image);
    } catch (const Error& e) {
      issues.push_back({IssueKind::UndecodableImage, r.id, e.what()});
    }
    try {
      const AlphaMask m = load_mask(mask);
      if (image_size && (image_size->width != m.width() || image_size->height != m.height())) {
        issues.push_back({IssueKind::DimensionMismatch, r.id,
                          "image " + std::to_string(image_size->width) + "x" +
                              std::to_string(image_size->height) + " vs mask " +
                              std::to_string(m.width()) + "x" + std::to_string(m.height())});
      }
      const auto values = m.values();
      const bool has_foreground = std::any_of(values.begin(), values.end(), [](std::uint8_t v) {
        return v > kDefaultForegroundThreshold;
      });
      if (!has_foreground) {
        issues.push_back({IssueKind::EmptyForeground, r.id, "no mask pixel above 128"});
      }
    } catch (const Error& e) {
      issues.push_back({IssueKind::UndecodableMask, r.id, e.what()});
    }
  }
  std::stable_sort(issues.begin(), issues.end(), [](const ManifestIssue& a, const ManifestIssue& b) {
    return a.record_id < b.record_id;
  });
  return issues;
}

}  // namespace toonbench
