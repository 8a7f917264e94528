#include <csignal>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "toonbench/bench.hpp"
#include "toonbench/concordance.hpp"
#include "toonbench/dataset.hpp"
#include "toonbench/error.hpp"
#include "toonbench/report.hpp"
#include "toonbench/review.hpp"

namespace fs = std::filesystem;
using namespace toonbench;

namespace {

constexpr int kDataError = 1;
constexpr int kUsageError = 2;

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_path);
  out << text;
}

std::vector<ModelSpec> parse_models(const std::vector<std::string>& specs) {
  std::vector<ModelSpec> models;
  std::set<std::string> names;
  for (const auto& s : specs) {
    models.push_back(parse_model_spec(s));
    if (!names.insert(models.back().name).second) {
      throw Error(ErrorCode::InvalidArgument, "model '" + models.back().name + "' given twice");
    }
  }
  return models;
}

std::optional<Split> split_option(const std::string& name) {
  if (name == "all") return std::nullopt;
  return parse_split(name);
}

std::vector<std::string> split_choices() { return {"train", "validation", "test", "all"}; }

std::vector<std::string> metric_choices() {
  std::vector<std::string> out;
  for (MetricId id : kReportOrder) out.emplace_back(metric_name(id));
  return out;
}

struct EvalFlags {
  std::string manifest;
  std::vector<std::string> preds;
  std::string split = "test";
  std::string format = "markdown";
  std::string out;
  bool allow_missing = false;
  int pa_delta = 10;
  int pa_erosion = 1;
  double biou_ratio = 0.02;
  int jobs = 1;
  double error_scale = 1.0;
  std::string statistic = "max";
  std::string criterion = "PA";
};

void add_eval_options(CLI::App* cmd, EvalFlags& f) {
  cmd->add_option("--manifest", f.manifest, "Dataset manifest (JSON)")->required();
  cmd->add_option("--pred", f.preds, "Model predictions as NAME=DIR (repeatable)")->required();
  cmd->add_flag("--allow-missing", f.allow_missing,
                "Skip images without a prediction instead of failing");
  cmd->add_option("--pa-delta", f.pa_delta, "Pixel Accuracy tolerance on |p-g|")
      ->check(CLI::Range(0, 255));
  cmd->add_option("--pa-erosion", f.pa_erosion, "Erosion passes over the error mask")
      ->check(CLI::Range(0, 1000));
  cmd->add_option("--biou-ratio", f.biou_ratio, "Boundary band width as a fraction of the diagonal")
      ->check(CLI::Range(1e-9, 1.0));
  cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::Range(1, 1024));
  cmd->add_option("--statistic", f.statistic, "Threshold statistic for F and E")
      ->check(CLI::IsMember({"max", "mean"}));
}

BenchmarkOptions benchmark_options(const EvalFlags& f) {
  BenchmarkOptions opt;
  opt.eval.pixel_accuracy.delta = f.pa_delta;
  opt.eval.pixel_accuracy.erosion_iterations = f.pa_erosion;
  opt.eval.boundary_dilation_ratio = f.biou_ratio;
  opt.eval.threshold_statistic =
      f.statistic == "mean" ? ThresholdStatistic::Mean : ThresholdStatistic::Max;
  opt.split = split_option(f.split);
  opt.allow_missing = f.allow_missing;
  opt.jobs = f.jobs;
  return opt;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int run_eval(const EvalFlags& f) {
  const auto manifest = load_manifest(f.manifest);
  std::vector<std::string> warnings;
  const auto reports = run_benchmark(manifest, parse_models(f.preds), benchmark_options(f), &warnings);
  print_warnings(warnings);
  RenderOptions render;
  render.error_scale = f.error_scale;
  write_output(f.out, render_report(reports, *parse_report_format(f.format), render));
  return 0;
}

int run_select(const EvalFlags& f) {
  const auto manifest = load_manifest(f.manifest);
  const auto selection = select_checkpoint(parse_models(f.preds), manifest,
                                           *parse_metric_id(f.criterion), benchmark_options(f));
  if (!f.out.empty()) {
    write_output(f.out, render_report(selection.reports, *parse_report_format(f.format)));
  }
  std::cout << selection.model_name << '\n';
  return 0;
}

int run_split(const std::string& manifest_path, std::uint64_t seed, const std::string& out) {
  const auto manifest = load_manifest(manifest_path);
  const auto split = assign_splits(manifest, seed);
  const std::string target = out.empty() ? manifest_path : out;
  if (target == "-") {
    std::cout << manifest_to_json(split);
  } else {
    save_manifest(target, split);
  }
  SplitCounts total;
  std::cerr << "category   train  validation  test\n";
  for (const auto& [category, counts] : count_splits(split)) {
    char line[96];
    std::snprintf(line, sizeof line, "%-9s %6zu %11zu %5zu\n", std::string(category_name(category)).c_str(),
                  counts.train, counts.validation, counts.test);
    std::cerr << line;
    total.train += counts.train;
    total.validation += counts.validation;
    total.test += counts.test;
  }
  char line[96];
  std::snprintf(line, sizeof line, "%-9s %6zu %11zu %5zu\n", "total", total.train, total.validation,
                total.test);
  std::cerr << line;
  return 0;
}

int run_curate(const std::string& scores_path, const CurationPolicy& policy,
               const std::string& out) {
  const auto scored = load_scored_records(scores_path);
  const auto result = curate(scored, policy);
  DatasetManifest manifest;
  manifest.records = result.selected;
  write_output(out, manifest_to_json(manifest));
  std::cerr << "selected " << result.selected.size() << " (" << result.hard_count << " hard, "
            << result.easy_count << " easy)\n";
  if (result.short_of_target) {
    std::cerr << "warning: only " << result.selected.size() << " of " << policy.target_size
              << " requested records could be selected under the easy cap\n";
  }
  return 0;
}

int run_validate(const std::string& manifest_path) {
  const auto manifest = load_manifest(manifest_path);
  const auto issues = validate_manifest(manifest);
  for (const auto& issue : issues) {
    std::cout << issue.record_id << '\t' << issue_name(issue.kind) << '\t' << issue.detail << '\n';
  }
  if (!issues.empty()) {
    std::cerr << issues.size() << " issue(s) in " << manifest.records.size() << " records\n";
    return kDataError;
  }
  std::cerr << manifest.records.size() << " records, no issues\n";
  return 0;
}

int run_concord(const std::string& rankings_path, const EvalFlags& f, const std::string& ties,
                const std::string& format) {
  const auto rankings = load_rankings(rankings_path);
  if (rankings.empty()) throw Error(ErrorCode::NoComparablePairs, "rankings file is empty");
  const auto full = load_manifest(f.manifest);
  std::set<std::string> ranked;
  for (const auto& r : rankings) ranked.insert(r.image_id);
  DatasetManifest subset = full;
  subset.records.clear();
  for (const auto& r : full.records) {
    if (ranked.contains(r.id)) subset.records.push_back(r);
  }
  if (subset.records.empty()) {
    throw Error(ErrorCode::NoComparablePairs, "no ranked image appears in the manifest");
  }
  EvalFlags scoped = f;
  scoped.split = "all";
  scoped.allow_missing = true;
  std::vector<std::string> warnings;
  const auto reports = run_benchmark(subset, parse_models(f.preds), benchmark_options(scoped), &warnings);
  ScoreTable table;
  for (const auto& report : reports) {
    if (report.scope) continue;
    for (const auto& img : report.per_image) {
      auto& slot = table[img.record_id][report.model_name];
      for (const auto& m : img.metrics) {
        if (m.value) slot[m.id] = *m.value;
      }
    }
  }
  const auto result = compute_concordance(rankings, table, *parse_tie_policy(ties));
  if (format == "json") {
    std::cout << concordance_to_json(result) << '\n';
    return 0;
  }
  std::cout << "metric  agreement\n";
  for (MetricId id : rank_metrics(result)) {
    char line[64];
    std::snprintf(line, sizeof line, "%-6s  %.4f\n", std::string(metric_name(id)).c_str(),
                  result.agreement.at(id));
    std::cout << line;
  }
  std::cout << "comparable pairs: " << result.comparable_pairs
            << ", dropped: " << result.dropped_pairs << '\n';
  return 0;
}

ReviewServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const EvalFlags& f, const std::string& rankings, std::uint64_t seed,
              const std::string& host, int port, const std::string& ui_dir) {
  ReviewConfig config;
  config.manifest = load_manifest(f.manifest);
  config.models = parse_models(f.preds);
  config.rankings_path = rankings;
  config.seed = seed;
  config.split = split_option(f.split);
  config.eval = benchmark_options(f).eval;
  ReviewSession session(std::move(config));
  ReviewServer server(session, ui_dir.empty() ? std::nullopt : std::optional<fs::path>(ui_dir));
  const int bound = server.bind(host, port);
  std::cerr << "serving " << session.image_count() << " images on http://" << host << ':' << bound
            << "/\n";
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.run();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segmentation mask benchmark toolkit"};
  app.require_subcommand(1);

  EvalFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Score model predictions against a manifest");
  add_eval_options(eval, eval_flags);
  eval->add_option("--split", eval_flags.split, "Split to evaluate")->check(CLI::IsMember(split_choices()));
  eval->add_option("--format", eval_flags.format, "Report format")
      ->check(CLI::IsMember({"markdown", "csv", "json"}));
  eval->add_option("--out", eval_flags.out, "Output file (stdout if omitted)");
  eval->add_option("--error-scale", eval_flags.error_scale, "Display multiplier for MAE and MSE")
      ->check(CLI::PositiveNumber);

  EvalFlags select_flags;
  auto* select = app.add_subcommand("select", "Pick the best checkpoint on the validation split");
  add_eval_options(select, select_flags);
  select->add_option("--criterion", select_flags.criterion, "Selection metric")
      ->check(CLI::IsMember(metric_choices()));
  select->add_option("--format", select_flags.format, "Format of the optional report")
      ->check(CLI::IsMember({"markdown", "csv", "json"}));
  select->add_option("--out", select_flags.out, "Also write the validation report here");

  std::string split_manifest, split_out;
  std::uint64_t split_seed = 0;
  auto* split = app.add_subcommand("split", "Assign stratified train/validation/test splits");
  split->add_option("--manifest", split_manifest, "Manifest without splits")->required();
  split->add_option("--seed", split_seed, "Shuffle seed")->required();
  split->add_option("--out", split_out, "Output manifest (default: rewrite in place, - for stdout)");

  std::string scores_path, curate_out;
  CurationPolicy policy;
  auto* cur = app.add_subcommand("curate", "Hard-example-first subset selection");
  cur->add_option("--scores", scores_path, "Manifest whose records carry a baseline score")->required();
  cur->add_option("--target", policy.target_size, "Number of records to select")->required();
  cur->add_option("--threshold", policy.easy_score_threshold, "Score at or above which a record is easy");
  cur->add_option("--easy-fraction", policy.easy_fraction, "Cap on easy records as a fraction of target")
      ->check(CLI::Range(0.0, 1.0));
  cur->add_option("--out", curate_out, "Output manifest (stdout if omitted)");

  std::string validate_manifest_path;
  auto* val = app.add_subcommand("validate", "Check a manifest for unusable records");
  val->add_option("--manifest", validate_manifest_path, "Manifest to check")->required();

  EvalFlags concord_flags;
  std::string rankings_path, ties = "half-credit", concord_format = "text";
  auto* concord = app.add_subcommand("concord", "Agreement of each metric with human rankings");
  add_eval_options(concord, concord_flags);
  concord->add_option("--rankings", rankings_path, "Rankings file (JSONL)")->required();
  concord->add_option("--ties", ties, "Credit for metric ties")
      ->check(CLI::IsMember({"half-credit", "disagree"}));
  concord->add_option("--format", concord_format, "Output format")->check(CLI::IsMember({"text", "json"}));

  EvalFlags serve_flags;
  serve_flags.split = "validation";
  std::string serve_rankings, host = "127.0.0.1", ui_dir;
  std::uint64_t serve_seed = 0;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the blinded ranking service");
  add_eval_options(serve, serve_flags);
  serve->add_option("--split", serve_flags.split, "Split to present")->check(CLI::IsMember(split_choices()));
  serve->add_option("--rankings", serve_rankings, "Rankings file to append to")->required();
  serve->add_option("--seed", serve_seed, "Presentation seed")->required();
  serve->add_option("--port", port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--ui", ui_dir, "Directory with the UI bundle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*eval) return run_eval(eval_flags);
    if (*select) return run_select(select_flags);
    if (*split) return run_split(split_manifest, split_seed, split_out);
    if (*cur) return run_curate(scores_path, policy, curate_out);
    if (*val) return run_validate(validate_manifest_path);
    if (*concord) return run_concord(rankings_path, concord_flags, ties, concord_format);
    if (*serve) {
      return run_serve(serve_flags, serve_rankings, serve_seed, host, port, ui_dir);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument ? kUsageError : kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
