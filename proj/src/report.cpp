#include "toonbench/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "toonbench/error.hpp"

namespace toonbench {

using nlohmann::json;
using nlohmann::ordered_json;

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  return std::nullopt;
}

std::string_view metric_title(MetricId id) {
  switch (id) {
    case MetricId::PA: return "Pixel Accuracy";
    case MetricId::BIoU: return "Mean Boundary IoU";
    case MetricId::WF: return "Weighted F-measure";
    case MetricId::F: return "F-measure";
    case MetricId::E: return "E-measure";
    case MetricId::S: return "S-measure";
    case MetricId::MAE: return "MAE";
    case MetricId::MSE: return "MSE";
  }
  return "?";
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string scope_name(const MetricReport& r) {
  return r.scope ? std::string(category_name(*r.scope)) : std::string("overall");
}

// Markdown cell text for a metric mean; percentages for bounded scores,
// scaled raw values for error metrics.
std::string display(MetricId id, const std::optional<double>& mean, const RenderOptions& opt) {
  if (!mean) return "n/a";
  char buf[64];
  if (direction_of(id) == Direction::HigherBetter) {
    std::snprintf(buf, sizeof buf, "%.2f%%", *mean * 100.0);
  } else {
    std::snprintf(buf, sizeof buf, "%.4f", *mean * opt.error_scale);
  }
  return buf;
}

// Parsed back from the rendered text so ties are judged at display precision.
std::optional<double> displayed_value(const std::string& cell) {
  if (cell == "n/a") return std::nullopt;
  return std::stod(cell);
}

void render_table(std::ostringstream& out, const std::vector<const MetricReport*>& rows,
                  bool with_scope, const RenderOptions& opt) {
  out << "| Model |";
  if (with_scope) out << " Dataset |";
  out << " Images |";
  for (MetricId id : kReportOrder) out << ' ' << metric_title(id) << " |";
  out << "\n|:---|";
  if (with_scope) out << ":---|";
  out << "---:|";
  for (std::size_t k = 0; k < kReportOrder.size(); ++k) out << "---:|";
  out << '\n';

  // Best displayed value per (scope, metric).
  std::map<std::string, std::array<std::optional<double>, kReportOrder.size()>> best;
  for (const MetricReport* r : rows) {
    auto& slot = best[scope_name(*r)];
    for (std::size_t k = 0; k < kReportOrder.size(); ++k) {
      const MetricId id = kReportOrder[k];
      const auto v = displayed_value(display(id, r->per_metric[k].mean, opt));
      if (v && (!slot[k] || is_better(id, *v, *slot[k]))) slot[k] = v;
    }
  }

  for (const MetricReport* r : rows) {
    out << "| " << r->model_name << " |";
    if (with_scope) out << ' ' << scope_name(*r) << " |";
    out << ' ' << r->image_count << " |";
    const auto& slot = best[scope_name(*r)];
    for (std::size_t k = 0; k < kReportOrder.size(); ++k) {
      const std::string cell = display(kReportOrder[k], r->per_metric[k].mean, opt);
      const auto v = displayed_value(cell);
      if (v && slot[k] && *v == *slot[k]) {
        out << " **" << cell << "** |";
      } else {
        out << ' ' << cell << " |";
      }
    }
    out << '\n';
  }
}

std::string render_markdown(const std::vector<MetricReport>& reports, const RenderOptions& opt) {
  std::vector<const MetricReport*> overall;
  std::vector<const MetricReport*> per_category;
  for (const auto& r : reports) (r.scope ? per_category : overall).push_back(&r);
  // Group category rows by category, keeping model order within a group.
  std::stable_sort(per_category.begin(), per_category.end(),
                   [](const MetricReport* a, const MetricReport* b) { return *a->scope < *b->scope; });

  std::ostringstream out;
  if (!overall.empty()) {
    out << "## Overall\n\n";
    render_table(out, overall, false, opt);
  }
  if (!per_category.empty()) {
    if (!overall.empty()) out << '\n';
    out << "## Per category\n\n";
    render_table(out, per_category, true, opt);
  }

  std::vector<std::string> notes;
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < kReportOrder.size(); ++k) {
      const auto& s = r.per_metric[k];
      if (s.absent == 0) continue;
      notes.push_back(r.model_name + " (" + scope_name(r) + "): " +
                      std::string(metric_name(kReportOrder[k])) + " defined on " +
                      std::to_string(s.scored) + "/" + std::to_string(r.image_count) + " images");
    }
  }
  if (!notes.empty()) {
    out << "\nCoverage:\n\n";
    for (const auto& n : notes) out << "- " << n << '\n';
  }
  if (opt.error_scale != 1.0) {
    out << "\nMAE and MSE shown multiplied by " << format_number(opt.error_scale) << ".\n";
  }
  return out.str();
}

std::string csv_value(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::string render_csv(const std::vector<MetricReport>& reports) {
  std::ostringstream out;
  out << "kind,model,scope,image_id,images";
  for (MetricId id : kReportOrder) out << ',' << metric_name(id);
  out << ",absent\n";
  for (const auto& r : reports) {
    out << "summary," << r.model_name << ',' << scope_name(r) << ",," << r.image_count;
    for (std::size_t k = 0; k < kReportOrder.size(); ++k) {
      out << ',' << csv_value(r.per_metric[k].mean);
    }
    out << ",\n";
  }
  for (const auto& r : reports) {
    if (r.scope) continue;
    for (const auto& img : r.per_image) {
      out << "image," << r.model_name << ',' << category_name(img.category) << ',' << img.record_id
          << ",1";
      std::string absent;
      for (const auto& m : img.metrics) {
        out << ',' << csv_value(m.value);
        if (m.absent_reason) {
          if (!absent.empty()) absent += ';';
          absent += std::string(metric_name(m.id)) + ":" + std::string(to_string(*m.absent_reason));
        }
      }
      out << ',' << absent << '\n';
    }
  }
  return out.str();
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string render_json(const std::vector<MetricReport>& reports) {
  ordered_json doc = ordered_json::object();
  ordered_json list = ordered_json::array();
  for (const auto& r : reports) {
    ordered_json item = ordered_json::object();
    item["model"] = r.model_name;
    item["scope"] = scope_name(r);
    item["images"] = r.image_count;
    ordered_json metrics = ordered_json::object();
    for (std::size_t k = 0; k < kReportOrder.size(); ++k) {
      const auto& s = r.per_metric[k];
      metrics[std::string(metric_name(kReportOrder[k]))] = {
          {"mean", optional_number(s.mean)}, {"scored", s.scored}, {"absent", s.absent}};
    }
    item["metrics"] = std::move(metrics);
    if (!r.scope) {
      ordered_json images = ordered_json::array();
      for (const auto& img : r.per_image) {
        ordered_json row = ordered_json::object();
        row["id"] = img.record_id;
        row["category"] = std::string(category_name(img.category));
        ordered_json values = ordered_json::object();
        ordered_json absent = ordered_json::object();
        for (const auto& m : img.metrics) {
          values[std::string(metric_name(m.id))] = optional_number(m.value);
          if (m.absent_reason) {
            absent[std::string(metric_name(m.id))] = std::string(to_string(*m.absent_reason));
          }
        }
        row["metrics"] = std::move(values);
        if (!absent.empty()) row["absent"] = std::move(absent);
        images.push_back(std::move(row));
      }
      item["per_image"] = std::move(images);
    }
    list.push_back(std::move(item));
  }
  doc["reports"] = std::move(list);
  return doc.dump(2) + "\n";
}

}  // namespace

std::string render_report(const std::vector<MetricReport>& reports, ReportFormat format,
                          const RenderOptions& options) {
  if (reports.empty()) throw Error(ErrorCode::EmptyReports, "nothing to render");
  switch (format) {
    case ReportFormat::Markdown: return render_markdown(reports, options);
    case ReportFormat::Csv: return render_csv(reports);
    case ReportFormat::Json: return render_json(reports);
  }
  return {};
}

}  // namespace toonbench
