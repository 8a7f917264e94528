#include "toonbench/concordance.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>

#include <json.hpp>

#include "toonbench/error.hpp"

namespace toonbench {

using nlohmann::json;

void HumanRanking::validate() const {
  if (ordering.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "ranking needs at least two models");
  }
  std::set<std::string> seen(ordering.begin(), ordering.end());
  if (seen.size() != ordering.size()) {
    throw Error(ErrorCode::InvalidArgument, "ranking lists a model twice");
  }
}

std::string_view tie_policy_name(TiePolicy p) {
  return p == TiePolicy::HalfCredit ? "half-credit" : "disagree";
}

std::optional<TiePolicy> parse_tie_policy(std::string_view name) {
  if (name == "half-credit" || name == "half") return TiePolicy::HalfCredit;
  if (name == "disagree") return TiePolicy::Disagree;
  return std::nullopt;
}

ConcordanceReport compute_concordance(std::span<const HumanRanking> rankings,
                                      const ScoreTable& scores, TiePolicy tie_policy,
                                      std::span<const MetricId> metrics) {
  ConcordanceReport report;
  report.tie_policy = tie_policy;
  // Credits are counted in half-units to stay exact.
  std::map<MetricId, std::size_t> half_credits;
  for (MetricId id : metrics) half_credits[id] = 0;

  auto lookup = [&](const std::string& image,
                    const std::string& model) -> const std::map<MetricId, double>* {
    const auto img = scores.find(image);
    if (img == scores.end()) return nullptr;
    const auto m = img->second.find(model);
    return m == img->second.end() ? nullptr : &m->second;
  };

  for (const auto& ranking : rankings) {
    ranking.validate();
    const auto& order = ranking.ordering;
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (std::size_t j = i + 1; j < order.size(); ++j) {
        const auto* preferred = lookup(ranking.image_id, order[i]);
        const auto* other = lookup(ranking.image_id, order[j]);
        const bool complete =
            preferred && other && std::all_of(metrics.begin(), metrics.end(), [&](MetricId id) {
              return preferred->contains(id) && other->contains(id);
            });
        if (!complete) {
          ++report.dropped_pairs;
          continue;
        }
        ++report.comparable_pairs;
        for (MetricId id : metrics) {
          const double a = preferred->at(id);
          const double b = other->at(id);
          if (is_better(id, a, b)) {
            half_credits[id] += 2;
          } else if (a == b && tie_policy == TiePolicy::HalfCredit) {
            half_credits[id] += 1;
          }
        }
      }
    }
  }
  if (report.comparable_pairs == 0) {
    throw Error(ErrorCode::NoComparablePairs,
                std::to_string(report.dropped_pairs) + " pairs dropped, none comparable");
  }
  for (const auto& [id, credit] : half_credits) {
    report.credited[id] = static_cast<double>(credit) / 2.0;
    report.agreement[id] =
        static_cast<double>(credit) / (2.0 * static_cast<double>(report.comparable_pairs));
  }
  return report;
}

std::vector<MetricId> rank_metrics(const ConcordanceReport& report) {
  std::vector<MetricId> ids;
  for (const auto& [id, rate] : report.agreement) ids.push_back(id);
  std::sort(ids.begin(), ids.end(), [&](MetricId a, MetricId b) {
    const double ra = report.agreement.at(a);
    const double rb = report.agreement.at(b);
    if (ra != rb) return ra > rb;
    return metric_name(a) < metric_name(b);
  });
  return ids;
}

std::string ranking_to_json_line(const HumanRanking& ranking) {
  nlohmann::ordered_json j = {{"imageId", ranking.image_id},
                              {"annotatorId", ranking.annotator_id},
                              {"ordering", ranking.ordering},
                              {"timestamp", ranking.timestamp}};
  return j.dump();
}

HumanRanking parse_ranking_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::DecodeError, std::string("ranking line: ") + e.what());
  }
  HumanRanking r;
  try {
    r.image_id = j.at("imageId").get<std::string>();
    r.annotator_id = j.at("annotatorId").get<std::string>();
    r.ordering = j.at("ordering").get<std::vector<std::string>>();
    r.timestamp = j.at("timestamp").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DecodeError, std::string("ranking line: ") + e.what());
  }
  r.validate();
  return r;
}

std::vector<HumanRanking> load_rankings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::vector<HumanRanking> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_ranking_line(line));
  }
  return out;
}

std::string utc_timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

std::string concordance_to_json(const ConcordanceReport& report) {
  nlohmann::ordered_json rates = nlohmann::ordered_json::object();
  nlohmann::ordered_json order = nlohmann::ordered_json::array();
  for (MetricId id : rank_metrics(report)) {
    rates[std::string(metric_name(id))] = report.agreement.at(id);
    order.push_back(std::string(metric_name(id)));
  }
  nlohmann::ordered_json j = {{"comparablePairs", report.comparable_pairs},
                              {"droppedPairs", report.dropped_pairs},
                              {"tiePolicy", std::string(tie_policy_name(report.tie_policy))},
                              {"perMetric", rates},
                              {"ranking", order}};
  return j.dump(2);
}

}  // namespace toonbench
