#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>

#include "fixtures.hpp"
#include "toonbench/concordance.hpp"
#include "toonbench/error.hpp"

using namespace toonbench;

namespace {

HumanRanking ranking(const std::string& image, std::vector<std::string> ordering) {
  return {image, "ann", std::move(ordering), "2026-01-01T00:00:00Z"};
}

const std::vector<MetricId> kPaMae = {MetricId::PA, MetricId::MAE};

}  // namespace

TEST(Concordance, FullAgreementOverThreePairs) {
  const std::vector<HumanRanking> rankings = {ranking("i", {"A", "B", "C"})};
  ScoreTable scores;
  scores["i"]["A"] = {{MetricId::PA, 0.9}, {MetricId::MAE, 0.3}};
  scores["i"]["B"] = {{MetricId::PA, 0.8}, {MetricId::MAE, 0.2}};
  scores["i"]["C"] = {{MetricId::PA, 0.7}, {MetricId::MAE, 0.1}};
  const auto r = compute_concordance(rankings, scores, TiePolicy::HalfCredit, kPaMae);
  EXPECT_EQ(r.comparable_pairs, 3u);
  EXPECT_EQ(r.agreement.at(MetricId::PA), 1.0);
  EXPECT_EQ(r.agreement.at(MetricId::MAE), 0.0);
  EXPECT_EQ(r.credited.at(MetricId::PA), 3.0);
  EXPECT_EQ(rank_metrics(r), (std::vector<MetricId>{MetricId::PA, MetricId::MAE}));
}

TEST(Concordance, TiePolicies) {
  const std::vector<HumanRanking> rankings = {ranking("i", {"A", "B"})};
  ScoreTable scores;
  scores["i"]["A"] = {{MetricId::PA, 0.5}};
  scores["i"]["B"] = {{MetricId::PA, 0.5}};
  const std::vector<MetricId> pa = {MetricId::PA};
  EXPECT_EQ(compute_concordance(rankings, scores, TiePolicy::HalfCredit, pa).agreement.at(MetricId::PA), 0.5);
  EXPECT_EQ(compute_concordance(rankings, scores, TiePolicy::Disagree, pa).agreement.at(MetricId::PA), 0.0);
  EXPECT_EQ(parse_tie_policy("half"), TiePolicy::HalfCredit);
  EXPECT_EQ(parse_tie_policy("disagree"), TiePolicy::Disagree);
  EXPECT_FALSE(parse_tie_policy("coin"));
  EXPECT_EQ(tie_policy_name(TiePolicy::HalfCredit), "half-credit");
}

TEST(Concordance, PairsMissingAnyMetricAreDropped) {
  const std::vector<HumanRanking> rankings = {ranking("i", {"A", "B"}), ranking("j", {"A", "B"}),
                                              ranking("k", {"A", "B"})};
  ScoreTable scores;
  scores["i"]["A"] = {{MetricId::PA, 0.9}, {MetricId::MAE, 0.1}};
  scores["i"]["B"] = {{MetricId::PA, 0.8}, {MetricId::MAE, 0.2}};
  scores["j"]["A"] = {{MetricId::MAE, 0.1}};
  scores["j"]["B"] = {{MetricId::PA, 0.1}, {MetricId::MAE, 0.2}};
  const auto r = compute_concordance(rankings, scores, TiePolicy::HalfCredit, kPaMae);
  EXPECT_EQ(r.comparable_pairs, 1u);
  EXPECT_EQ(r.dropped_pairs, 2u);
  EXPECT_EQ(r.agreement.at(MetricId::MAE), 1.0);
}

TEST(Concordance, NoComparablePairs) {
  try {
    compute_concordance(std::vector<HumanRanking>{}, {}, TiePolicy::HalfCredit);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoComparablePairs);
  }
}

TEST(Concordance, RankMetricsTiesAlphabetical) {
  ConcordanceReport r;
  r.agreement = {{MetricId::S, 0.5}, {MetricId::BIoU, 0.5}, {MetricId::MAE, 0.7}, {MetricId::E, 0.1}};
  EXPECT_EQ(rank_metrics(r),
            (std::vector<MetricId>{MetricId::MAE, MetricId::BIoU, MetricId::S, MetricId::E}));
}

TEST(HumanRankingRecord, Validation) {
  EXPECT_NO_THROW(ranking("i", {"a", "b"}).validate());
  EXPECT_THROW(ranking("i", {"a"}).validate(), Error);
  EXPECT_THROW(ranking("i", {"a", "b", "a"}).validate(), Error);
}

TEST(HumanRankingRecord, JsonLineRoundTrip) {
  const HumanRanking r{"img \"7\"", "ann-1", {"m1", "m2", "m3"}, "2026-03-04T05:06:07Z"};
  const std::string line = ranking_to_json_line(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(line.rfind("{\"imageId\":", 0), 0u);
  EXPECT_EQ(parse_ranking_line(line), r);
  try {
    parse_ranking_line("{\"imageId\": 3}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DecodeError);
  }
  EXPECT_THROW(parse_ranking_line(R"({"imageId":"i","annotatorId":"a","ordering":["x"],"timestamp":"t"})"),
               Error);
}

TEST(HumanRankingRecord, FileLoading) {
  const auto dir = fixtures::scratch_dir("rankings");
  const HumanRanking a = ranking("i", {"x", "y"});
  const HumanRanking b = ranking("j", {"y", "x"});
  std::ofstream(dir / "r.jsonl") << ranking_to_json_line(a) << "\n\n" << ranking_to_json_line(b) << "\n";
  EXPECT_EQ(load_rankings(dir / "r.jsonl"), (std::vector<HumanRanking>{a, b}));
  try {
    load_rankings(dir / "missing.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FileNotFound);
  }
}

TEST(HumanRankingRecord, TimestampShape) {
  const std::string ts = utc_timestamp_now();
  ASSERT_EQ(ts.size(), 20u);
  EXPECT_EQ(ts[4], '-');
  EXPECT_EQ(ts[10], 'T');
  EXPECT_EQ(ts.back(), 'Z');
}

TEST(Concordance, JsonDocument) {
  const std::vector<HumanRanking> rankings = {ranking("i", {"A", "B"})};
  ScoreTable scores;
  scores["i"]["A"] = {{MetricId::PA, 0.9}, {MetricId::MAE, 0.1}};
  scores["i"]["B"] = {{MetricId::PA, 0.9}, {MetricId::MAE, 0.2}};
  const auto doc = nlohmann::json::parse(
      concordance_to_json(compute_concordance(rankings, scores, TiePolicy::HalfCredit, kPaMae)));
  EXPECT_EQ(doc.at("comparablePairs"), 1);
  EXPECT_EQ(doc.at("tiePolicy"), "half-credit");
  EXPECT_EQ(doc.at("ranking").at(0), "MAE");
  EXPECT_EQ(doc.at("perMetric").at("PA").get<double>(), 0.5);
}
