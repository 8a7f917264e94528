#include <gtest/gtest.h>
#include <png.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "toonbench/dataset.hpp"
#include "toonbench/error.hpp"
#include "toonbench/image_io.hpp"

using namespace toonbench;
namespace fs = std::filesystem;

namespace {

DatasetManifest synthetic(const std::vector<std::pair<Category, std::size_t>>& sizes) {
  DatasetManifest m;
  for (const auto& [category, n] : sizes) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = std::string(category_name(category)) + "_" + std::to_string(i);
      m.records.push_back({id, "images/" + id + ".png", "masks/" + id + ".png", category, std::nullopt});
    }
  }
  return m;
}

std::vector<ScoredRecord> scored_set(std::size_t hard, std::size_t easy, std::mt19937_64& rng) {
  std::vector<ScoredRecord> out;
  std::uniform_real_distribution<double> hard_score(0.5, 0.989);
  std::uniform_real_distribution<double> easy_score(0.99, 1.0);
  for (std::size_t i = 0; i < hard + easy; ++i) {
    DatasetRecord r{"r" + std::to_string(1000 + i), "i.png", "m.png", Category::Pose, std::nullopt};
    out.push_back({r, i < hard ? hard_score(rng) : easy_score(rng)});
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

TEST(Split, CountsReproducePublishedComposition) {
  const std::vector<std::pair<std::size_t, SplitCounts>> table = {
      {73, {58, 7, 8}},     {252, {201, 25, 26}}, {249, {199, 25, 25}},
      {406, {324, 41, 41}}, {141, {112, 14, 15}}, {107, {85, 11, 11}}};
  for (const auto& [n, expected] : table) EXPECT_EQ(split_counts(n), expected) << n;
  EXPECT_EQ(split_counts(10), (SplitCounts{8, 1, 1}));
}

TEST(Split, CountsAlwaysSumAndStayNearRatio) {
  for (std::size_t n = 1; n <= 500; ++n) {
    const SplitCounts c = split_counts(n);
    EXPECT_EQ(c.train + c.validation + c.test, n);
    EXPECT_LE(std::abs(static_cast<double>(c.train) - 0.8 * n), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(c.validation) - 0.1 * n), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(c.test) - 0.1 * n), 1.0);
  }
}

TEST(Split, AssignmentHonoursCountsPerCategory) {
  const DatasetManifest m = synthetic({{Category::Reference, 73}, {Category::Emotion, 252}, {Category::Items, 107}});
  const auto counts = count_splits(assign_splits(m, 42));
  EXPECT_EQ(counts.at(Category::Reference), (SplitCounts{58, 7, 8}));
  EXPECT_EQ(counts.at(Category::Emotion), (SplitCounts{201, 25, 26}));
  EXPECT_EQ(counts.at(Category::Items), (SplitCounts{85, 11, 11}));
}

TEST(Split, DeterministicAndOrderIndependent) {
  const DatasetManifest m = synthetic({{Category::Pose, 40}, {Category::Action, 23}});
  const DatasetManifest a = assign_splits(m, 7);
  EXPECT_EQ(a.records, assign_splits(m, 7).records);
  EXPECT_EQ(a.seed, 7u);

  DatasetManifest shuffled = m;
  std::mt19937_64 rng(3);
  std::shuffle(shuffled.records.begin(), shuffled.records.end(), rng);
  const DatasetManifest b = assign_splits(shuffled, 7);
  std::map<std::string, Split> by_id;
  for (const auto& r : a.records) by_id[r.id] = *r.split;
  for (const auto& r : b.records) EXPECT_EQ(by_id.at(r.id), *r.split) << r.id;

  const DatasetManifest c = assign_splits(m, 8);
  std::size_t differing = 0;
  for (std::size_t i = 0; i < c.records.size(); ++i) differing += c.records[i].split != a.records[i].split;
  EXPECT_GT(differing, 0u);
}

TEST(Split, Errors) {
  DatasetManifest m = synthetic({{Category::Pose, 5}});
  m.records[2].split = Split::Train;
  try {
    assign_splits(m, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AlreadySplit);
  }
  try {
    assign_splits(DatasetManifest{}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCategory);
  }
}

TEST(Manifest, JsonRoundTrip) {
  DatasetManifest m = assign_splits(synthetic({{Category::Factory, 10}, {Category::Emotion, 3}}), 99);
  m.base_dir = "/data/set";
  const DatasetManifest back = parse_manifest(manifest_to_json(m), "/data/set");
  EXPECT_EQ(back.records, m.records);
  EXPECT_EQ(back.seed, m.seed);
  EXPECT_EQ(back.resolve("masks/a.png"), fs::path("/data/set/masks/a.png"));
  EXPECT_EQ(back.resolve("/abs/a.png"), fs::path("/abs/a.png"));
  EXPECT_EQ(m.records_in(Split::Validation).size(), 1u);
  EXPECT_EQ(m.records_in(std::nullopt).size(), 13u);
}

TEST(Manifest, MalformedDocumentsRejected) {
  const char* bad[] = {
      "not json",
      "[]",
      R"({"records": []})",
      R"({"version": 2, "records": []})",
      R"({"version": 1})",
      R"({"version": 1, "records": [{"id": "a", "image": "i", "mask": "m"}]})",
      R"({"version": 1, "records": [{"id": "a", "image": "i", "mask": "m", "category": "cats"}]})",
      R"({"version": 1, "records": [{"id": "a", "image": "i", "mask": "m", "category": "pose", "split": "dev"}]})",
  };
  for (const char* doc : bad) {
    try {
      parse_manifest(doc, ".");
      ADD_FAILURE() << doc;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ManifestInvalid) << doc;
    }
  }
}

TEST(Manifest, SaveAndLoad) {
  const fs::path dir = fixtures::scratch_dir("manifest");
  DatasetManifest m = synthetic({{Category::Items, 2}});
  save_manifest(dir / "m.json", m);
  const DatasetManifest back = load_manifest(dir / "m.json");
  EXPECT_EQ(back.records, m.records);
  EXPECT_EQ(back.base_dir, dir);
  EXPECT_THROW(load_manifest(dir / "none.json"), Error);
}

TEST(Curate, AllHardTakesLowestScores) {
  std::mt19937_64 rng(5);
  const auto scored = scored_set(100, 0, rng);
  CurationPolicy policy;
  policy.target_size = 50;
  const CurationResult r = curate(scored, policy);
  ASSERT_EQ(r.selected.size(), 50u);
  std::vector<ScoredRecord> sorted = scored;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.baseline_score < b.baseline_score; });
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(r.selected[i].id, sorted[i].record.id);
  EXPECT_FALSE(r.short_of_target);
}

TEST(Curate, EasyCapApplies) {
  std::mt19937_64 rng(6);
  CurationPolicy policy;
  policy.target_size = 50;
  const CurationResult r = curate(scored_set(200, 200, rng), policy);
  EXPECT_EQ(r.hard_count, 40u);
  EXPECT_EQ(r.easy_count, 10u);
  EXPECT_EQ(r.selected.size(), 50u);
}

TEST(Curate, ShortWhenHardRunsOut) {
  std::mt19937_64 rng(7);
  CurationPolicy policy;
  policy.target_size = 50;
  const CurationResult r = curate(scored_set(5, 100, rng), policy);
  EXPECT_EQ(r.hard_count, 5u);
  EXPECT_EQ(r.easy_count, 10u);
  EXPECT_TRUE(r.short_of_target);
}

TEST(Curate, MatchesEnumerationOracle) {
  // Enumerate every admissible (hard, easy) split and keep the largest
  // selection, with easy examples filled up to their cap.
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t hard = rng() % 12;
    const std::size_t easy = rng() % 12;
    if (hard + easy == 0) continue;
    const auto scored = scored_set(hard, easy, rng);
    CurationPolicy policy;
    policy.target_size = 1 + rng() % (hard + easy);
    policy.easy_fraction = static_cast<double>(rng() % 11) / 10.0;
    std::size_t best_h = 0, best_e = 0;
    for (std::size_t h = 0; h <= hard; ++h) {
      for (std::size_t e = 0; e <= easy; ++e) {
        if (h + e > policy.target_size) continue;
        if (static_cast<double>(e) > policy.easy_fraction * policy.target_size + 1e-9) continue;
        if (h + e > best_h + best_e || (h + e == best_h + best_e && e > best_e)) {
          best_h = h;
          best_e = e;
        }
      }
    }
    const CurationResult r = curate(scored, policy);
    EXPECT_EQ(r.hard_count, best_h);
    EXPECT_EQ(r.easy_count, best_e);
    EXPECT_EQ(r.short_of_target, best_h + best_e < policy.target_size);
    // Hard first, each group ascending by score.
    std::map<std::string, double> score;
    for (const auto& s : scored) score[s.record.id] = s.baseline_score;
    for (std::size_t i = 0; i < r.selected.size(); ++i) {
      const bool is_hard = i < r.hard_count;
      EXPECT_EQ(score[r.selected[i].id] < policy.easy_score_threshold, is_hard);
      if (i > 0 && i != r.hard_count) {
        EXPECT_LE(score[r.selected[i - 1].id], score[r.selected[i].id]);
      }
    }
  }
}

TEST(Curate, TiesBrokenById) {
  std::vector<ScoredRecord> scored;
  for (const char* id : {"c", "a", "b"}) {
    scored.push_back({{id, "i", "m", Category::Pose, std::nullopt}, 0.5});
  }
  CurationPolicy policy;
  policy.target_size = 2;
  const auto r = curate(scored, policy);
  EXPECT_EQ(r.selected[0].id, "a");
  EXPECT_EQ(r.selected[1].id, "b");
}

TEST(Curate, Errors) {
  std::mt19937_64 rng(9);
  CurationPolicy policy;
  policy.target_size = 11;
  try {
    curate(scored_set(5, 5, rng), policy);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TargetTooLarge);
  }
  policy.target_size = 3;
  policy.easy_fraction = 1.5;
  EXPECT_THROW(curate(scored_set(5, 5, rng), policy), Error);
}

TEST(Curate, ScoresFileLoader) {
  const fs::path dir = fixtures::scratch_dir("scores");
  std::ofstream(dir / "s.json") << R"({"version": 1, "records": [
    {"id": "a", "image": "i.png", "mask": "m.png", "category": "pose", "score": 0.4},
    {"id": "b", "image": "i.png", "mask": "m.png", "category": "items", "score": 1}]})";
  const auto scored = load_scored_records(dir / "s.json");
  ASSERT_EQ(scored.size(), 2u);
  EXPECT_EQ(scored[0].baseline_score, 0.4);
  EXPECT_EQ(scored[1].record.category, Category::Items);
  std::ofstream(dir / "bad.json") << R"({"version": 1, "records": [
    {"id": "a", "image": "i.png", "mask": "m.png", "category": "pose"}]})";
  EXPECT_THROW(load_scored_records(dir / "bad.json"), Error);
}

class Validate : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fixtures::scratch_dir("validate");
    fs::create_directories(dir_ / "img");
    fs::create_directories(dir_ / "gt");
    for (const char* id : {"a", "b"}) {
      fixtures::write_png(dir_ / "img" / (std::string(id) + ".png"), 4, 3, PNG_COLOR_TYPE_RGB, 8,
                          std::vector<std::uint16_t>(36, 90));
      save_mask(dir_ / "gt" / (std::string(id) + ".png"), fixtures::filled_rect(4, 3, 1, 1, 2, 1, 255));
    }
    manifest_.base_dir = dir_;
    manifest_.records = {{"a", "img/a.png", "gt/a.png", Category::Pose, std::nullopt},
                         {"b", "img/b.png", "gt/b.png", Category::Items, std::nullopt}};
  }
  fs::path dir_;
  DatasetManifest manifest_;
};

TEST_F(Validate, CleanManifest) { EXPECT_TRUE(validate_manifest(manifest_).empty()); }

TEST_F(Validate, MissingMask) {
  fs::remove(dir_ / "gt" / "b.png");
  const auto issues = validate_manifest(manifest_);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].kind, IssueKind::MissingFile);
  EXPECT_EQ(issues[0].record_id, "b");
}

TEST_F(Validate, EmptyForegroundMismatchDuplicateUndecodable) {
  save_mask(dir_ / "gt" / "a.png", AlphaMask(4, 3, std::uint8_t{128}));
  save_mask(dir_ / "gt" / "b.png", fixtures::filled_rect(5, 3, 1, 1, 2, 1, 255));
  std::ofstream(dir_ / "gt" / "c.png") << "garbage";
  manifest_.records.push_back({"c", "img/a.png", "gt/c.png", Category::Pose, std::nullopt});
  manifest_.records.push_back({"a", "img/a.png", "gt/b.png", Category::Pose, std::nullopt});
  const auto issues = validate_manifest(manifest_);
  std::vector<std::pair<std::string, IssueKind>> got;
  for (const auto& i : issues) got.emplace_back(i.record_id, i.kind);
  const std::vector<std::pair<std::string, IssueKind>> expected = {
      {"a", IssueKind::DuplicateId},
      {"a", IssueKind::EmptyForeground},
      {"a", IssueKind::DimensionMismatch},
      {"b", IssueKind::DimensionMismatch},
      {"c", IssueKind::UndecodableMask}};
  EXPECT_EQ(got, expected);
}
