#include "toonbench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "detail/hashing.hpp"
#include "toonbench/error.hpp"
#include "toonbench/image_io.hpp"

namespace toonbench {

namespace fs = std::filesystem;

ModelSpec parse_model_spec(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw Error(ErrorCode::InvalidArgument, "expected NAME=DIR, got '" + text + "'");
  }
  return {text.substr(0, eq), fs::path(text.substr(eq + 1))};
}

namespace {

bool is_supported_prediction(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png";
}

}  // namespace

ModelRun resolve_run(const ModelSpec& spec, const DatasetManifest& manifest,
                     std::optional<Split> split) {
  std::error_code ec;
  if (!fs::is_directory(spec.prediction_dir, ec)) {
    throw Error(ErrorCode::FileNotFound,
                "prediction directory for '" + spec.name + "': " + spec.prediction_dir.string());
  }
  std::map<std::string, std::vector<fs::path>> by_stem;
  for (const auto& entry : fs::directory_iterator(spec.prediction_dir)) {
    if (!entry.is_regular_file() || !is_supported_prediction(entry.path())) continue;
    by_stem[entry.path().stem().string()].push_back(entry.path());
  }
  ModelRun run{spec.name, spec.prediction_dir, {}, {}};
  for (const DatasetRecord* r : manifest.records_in(split)) {
    const auto it = by_stem.find(r->id);
    if (it == by_stem.end()) {
      run.missing.push_back(r->id);
      continue;
    }
    if (it->second.size() > 1) {
      throw Error(ErrorCode::AmbiguousPrediction,
                  spec.name + ": several prediction files for '" + r->id + "'");
    }
    run.resolved.emplace_back(r, it->second.front());
  }
  return run;
}

// ---- cache ---------------------------------------------------------------------

std::optional<std::vector<MetricResult>> ScoreCache::find(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::insert(const std::string& key, std::vector<MetricResult> results) {
  std::unique_lock lock(mutex_);
  entries_.emplace(key, std::move(results));
}

std::size_t ScoreCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::string ScoreCache::key_for(const MaskPair& pair, const EvaluationConfig& cfg) {
  auto mask_digest = [](const AlphaMask& m) {
    std::string material = std::to_string(m.width()) + "x" + std::to_string(m.height()) + ":";
    material.append(reinterpret_cast<const char*>(m.values().data()), m.values().size());
    return detail::to_hex(detail::sha256(material));
  };
  std::ostringstream settings;
  settings.precision(17);
  settings << cfg.pixel_accuracy.delta << ',' << cfg.pixel_accuracy.foreground_threshold << ','
           << cfg.pixel_accuracy.erosion_iterations << ',' << cfg.boundary_dilation_ratio << ','
           << static_cast<int>(cfg.threshold_statistic);
  return mask_digest(pair.prediction()) + "|" + mask_digest(pair.ground_truth()) + "|" +
         settings.str();
}

// ---- reports ---------------------------------------------------------------------

std::size_t report_index(MetricId id) {
  for (std::size_t i = 0; i < kReportOrder.size(); ++i) {
    if (kReportOrder[i] == id) return i;
  }
  return 0;
}

std::optional<double> ImageScore::value(MetricId id) const {
  for (const auto& m : metrics) {
    if (m.id == id) return m.value;
  }
  return std::nullopt;
}

const MetricSummary& MetricReport::summary(MetricId id) const {
  return per_metric[report_index(id)];
}

namespace {

MetricReport reduce(const std::string& model, std::optional<Category> scope,
                    const std::vector<const ImageScore*>& images) {
  MetricReport report;
  report.model_name = model;
  report.scope = scope;
  report.image_count = images.size();
  std::array<double, kReportOrder.size()> sums{};
  for (const ImageScore* img : images) {
    report.per_image.push_back(*img);
    for (std::size_t k = 0; k < kReportOrder.size(); ++k) {
      const auto v = img->value(kReportOrder[k]);
      if (v) {
        sums[k] += *v;
        ++report.per_metric[k].scored;
      } else {
        ++report.per_metric[k].absent;
      }
    }
  }
  for (std::size_t k = 0; k < kReportOrder.size(); ++k) {
    auto& s = report.per_metric[k];
    if (s.scored > 0) s.mean = sums[k] / static_cast<double>(s.scored);
  }
  return report;
}

}  // namespace

std::vector<MetricReport> aggregate(const std::string& model_name,
                                    const std::vector<ImageScore>& images) {
  std::vector<MetricReport> out;
  std::vector<const ImageScore*> all;
  for (const auto& img : images) all.push_back(&img);
  out.push_back(reduce(model_name, std::nullopt, all));
  for (Category c : kAllCategories) {
    std::vector<const ImageScore*> subset;
    for (const auto& img : images) {
      if (img.category == c) subset.push_back(&img);
    }
    if (!subset.empty()) out.push_back(reduce(model_name, c, subset));
  }
  return out;
}

// ---- benchmark -------------------------------------------------------------------

namespace {

struct Job {
  const DatasetRecord* record;
  fs::path prediction;
};

std::vector<MetricResult> score_pair(const DatasetManifest& manifest, const Job& job,
                                     const BenchmarkOptions& options) {
  AlphaMask gt = [&] {
    try {
      return load_mask(manifest.resolve(job.record->mask));
    } catch (const Error& e) {
      throw Error(ErrorCode::ManifestInvalid,
                  "ground truth for '" + job.record->id + "': " + e.what());
    }
  }();
  AlphaMask pred = load_mask(job.prediction);
  const MaskPair pair(std::move(pred), std::move(gt));
  if (!options.cache) return evaluate_all(pair, options.eval);
  const std::string key = ScoreCache::key_for(pair, options.eval);
  if (auto hit = options.cache->find(key)) return *hit;
  auto results = evaluate_all(pair, options.eval);
  options.cache->insert(key, results);
  return results;
}

// Runs fn(i) for i in [0, count) on `jobs` threads. The first failure by
// index is rethrown, so errors are independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn fn) {
  std::vector<std::exception_ptr> failures(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, jobs));
  if (threads == 1 || count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

}  // namespace

std::vector<MetricReport> run_benchmark(const DatasetManifest& manifest,
                                        const std::vector<ModelSpec>& models,
                                        const BenchmarkOptions& options,
                                        std::vector<std::string>* warnings) {
  options.eval.pixel_accuracy.validate();
  std::set<std::string> ids;
  for (const auto& r : manifest.records) {
    if (!ids.insert(r.id).second) {
      throw Error(ErrorCode::ManifestInvalid, "duplicate record id '" + r.id + "'");
    }
  }

  std::vector<ModelRun> runs;
  for (const auto& spec : models) {
    ModelRun run = resolve_run(spec, manifest, options.split);
    if (!run.missing.empty()) {
      if (!options.allow_missing) {
        throw Error(ErrorCode::MissingPrediction,
                    spec.name + ": no prediction for '" + run.missing.front() + "' (" +
                        std::to_string(run.missing.size()) + " missing in total)");
      }
      if (warnings) {
        for (const auto& id : run.missing) {
          warnings->push_back(spec.name + ": missing prediction for '" + id + "', excluded");
        }
      }
    }
    if (run.resolved.empty()) {
      throw Error(ErrorCode::NoPairsResolved, spec.name + ": no prediction matched the manifest");
    }
    runs.push_back(std::move(run));
  }

  std::vector<Job> jobs;
  std::vector<std::size_t> run_offsets;
  for (const auto& run : runs) {
    run_offsets.push_back(jobs.size());
    for (const auto& [record, path] : run.resolved) jobs.push_back({record, path});
  }
  std::vector<std::vector<MetricResult>> results(jobs.size());
  parallel_for(jobs.size(), options.jobs,
               [&](std::size_t i) { results[i] = score_pair(manifest, jobs[i], options); });

  std::vector<MetricReport> reports;
  for (std::size_t m = 0; m < runs.size(); ++m) {
    std::vector<ImageScore> images;
    for (std::size_t k = 0; k < runs[m].resolved.size(); ++k) {
      const std::size_t j = run_offsets[m] + k;
      images.push_back({jobs[j].record->id, jobs[j].record->category, results[j]});
    }
    auto model_reports = aggregate(runs[m].model_name, images);
    for (auto& r : model_reports) reports.push_back(std::move(r));
  }
  return reports;
}

// ---- checkpoint selection ----------------------------------------------------------

std::string best_model(const std::vector<MetricReport>& reports, MetricId criterion) {
  const MetricReport* best = nullptr;
  for (const auto& r : reports) {
    if (r.scope) continue;
    const auto mean = r.summary(criterion).mean;
    if (!best) {
      best = &r;
      continue;
    }
    const auto best_mean = best->summary(criterion).mean;
    bool take = false;
    if (mean && !best_mean) {
      take = true;
    } else if (mean && best_mean) {
      if (is_better(criterion, *mean, *best_mean)) {
        take = true;
      } else if (*mean == *best_mean && r.model_name < best->model_name) {
        take = true;
      }
    } else if (!mean && !best_mean && r.model_name < best->model_name) {
      take = true;
    }
    if (take) best = &r;
  }
  if (!best) throw Error(ErrorCode::NoCandidates, "no overall report to select from");
  return best->model_name;
}

CheckpointSelection select_checkpoint(const std::vector<ModelSpec>& candidates,
                                      const DatasetManifest& manifest, MetricId criterion,
                                      BenchmarkOptions options) {
  if (candidates.empty()) throw Error(ErrorCode::NoCandidates, "no checkpoint candidates given");
  options.split = Split::Validation;
  CheckpointSelection out;
  out.reports = run_benchmark(manifest, candidates, options);
  out.model_name = best_model(out.reports, criterion);
  return out;
}

}  // namespace toonbench
