#include "toonbench/review.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include <httplib.h>
#include <json.hpp>

#include "detail/hashing.hpp"
#include "detail/random.hpp"
#include "toonbench/error.hpp"

namespace toonbench {

namespace fs = std::filesystem;

RgbImage composite_over_checkerboard(const RgbImage& image, const AlphaMask& alpha, int cell) {
  if (image.width != alpha.width() || image.height != alpha.height()) {
    throw Error(ErrorCode::DimensionMismatch, "image and mask sizes differ");
  }
  if (cell < 1) throw Error(ErrorCode::InvalidArgument, "checkerboard cell must be positive");
  RgbImage out{image.width, image.height, std::vector<std::uint8_t>(image.rgb.size())};
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const unsigned a = alpha.at(x, y);
      const unsigned board = ((x / cell + y / cell) % 2 == 0) ? 255 : 204;
      const std::size_t base = (static_cast<std::size_t>(y) * image.width + x) * 3;
      for (int c = 0; c < 3; ++c) {
        out.rgb[base + c] =
            static_cast<std::uint8_t>((a * image.rgb[base + c] + (255 - a) * board + 127) / 255);
      }
    }
  }
  return out;
}

namespace {

std::string blind_label(std::size_t index) {
  std::string label;
  ++index;
  while (index > 0) {
    --index;
    label.insert(label.begin(), static_cast<char>('A' + index % 26));
    index /= 26;
  }
  return label;
}

std::string make_handle(std::uint64_t seed, const std::string& image_id, const std::string& role) {
  std::string material = std::to_string(seed);
  material.push_back('\0');
  material.append(image_id);
  material.push_back('\0');
  material.append(role);
  const auto digest = detail::sha256(material);
  return detail::to_hex(std::span<const std::uint8_t>(digest.data(), 16));
}

}  // namespace

ReviewSession::ReviewSession(ReviewConfig config) : config_(std::move(config)) {
  if (config_.models.size() < 2) {
    throw Error(ErrorCode::SessionNotInitialized, "a review needs at least two models");
  }
  std::set<std::string> names;
  for (const auto& m : config_.models) {
    if (!names.insert(m.name).second) {
      throw Error(ErrorCode::InvalidArgument, "model name '" + m.name + "' given twice");
    }
  }

  std::vector<ModelRun> runs;
  for (const auto& spec : config_.models) runs.push_back(resolve_run(spec, config_.manifest, config_.split));
  for (const DatasetRecord* record : config_.manifest.records_in(config_.split)) {
    Entry entry;
    entry.record = record;
    for (const auto& run : runs) {
      const auto it = std::find_if(run.resolved.begin(), run.resolved.end(),
                                   [&](const auto& r) { return r.first == record; });
      if (it == run.resolved.end()) break;
      entry.predictions.push_back(it->second);
    }
    if (entry.predictions.size() != runs.size()) continue;
    if (entries_.contains(record->id)) {
      throw Error(ErrorCode::ManifestInvalid, "duplicate record id '" + record->id + "'");
    }
    order_.push_back(record->id);
    entries_.emplace(record->id, std::move(entry));
  }
  if (order_.empty()) {
    throw Error(ErrorCode::SessionNotInitialized, "no image has a prediction from every model");
  }

  std::sort(order_.begin(), order_.end());
  auto engine = detail::make_engine(config_.seed, "review-order");
  detail::shuffle(order_, engine);

  for (auto& [id, entry] : entries_) {
    entry.presentation.resize(config_.models.size());
    for (std::size_t i = 0; i < entry.presentation.size(); ++i) entry.presentation[i] = i;
    auto labels = detail::make_engine(config_.seed, "labels:" + id);
    detail::shuffle(entry.presentation, labels);

    entry.original_handle = make_handle(config_.seed, id, "original");
    assets_[entry.original_handle] = {id, std::nullopt};
    for (std::size_t m = 0; m < config_.models.size(); ++m) {
      const auto handle = make_handle(config_.seed, id, "candidate:" + config_.models[m].name);
      entry.candidate_handles.push_back(handle);
      assets_[handle] = {id, m};
    }
  }

  std::error_code ec;
  if (fs::exists(config_.rankings_path, ec)) {
    rankings_ = load_rankings(config_.rankings_path);
    for (const auto& r : rankings_) completed_.emplace(r.annotator_id, r.image_id);
  }
}

RankingTask ReviewSession::make_task(const Entry& entry, std::size_t remaining) const {
  RankingTask task;
  task.image_id = entry.record->id;
  task.original_handle = entry.original_handle;
  task.remaining = remaining;
  for (std::size_t i = 0; i < entry.presentation.size(); ++i) {
    task.candidates.push_back({blind_label(i), entry.candidate_handles[entry.presentation[i]]});
  }
  return task;
}

std::optional<RankingTask> ReviewSession::next_task(const std::string& annotator_id) const {
  std::shared_lock lock(state_mutex_);
  const Entry* first = nullptr;
  std::size_t remaining = 0;
  for (const auto& id : order_) {
    if (completed_.contains({annotator_id, id})) continue;
    if (!first) first = &entries_.at(id);
    ++remaining;
  }
  if (!first) return std::nullopt;
  return make_task(*first, remaining);
}

std::size_t ReviewSession::completed_count(const std::string& annotator_id) const {
  std::shared_lock lock(state_mutex_);
  return static_cast<std::size_t>(std::count_if(order_.begin(), order_.end(), [&](const auto& id) {
    return completed_.contains({annotator_id, id});
  }));
}

std::vector<HumanRanking> ReviewSession::rankings() const {
  std::shared_lock lock(state_mutex_);
  return rankings_;
}

void ReviewSession::append_durably(const std::string& line) {
  const int fd = ::open(config_.rankings_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::IoError,
                config_.rankings_path.string() + ": " + std::strerror(errno));
  }
  const std::string data = line + "\n";
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw Error(ErrorCode::IoError, config_.rankings_path.string() + ": " + std::strerror(err));
    }
    written += static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  const int err = errno;
  ::close(fd);
  if (!synced) {
    throw Error(ErrorCode::IoError, config_.rankings_path.string() + ": " + std::strerror(err));
  }
}

HumanRanking ReviewSession::submit_ranking(const std::string& annotator_id,
                                           const std::string& image_id,
                                           const std::vector<std::string>& ordered_labels) {
  std::lock_guard writer(write_mutex_);
  const auto it = entries_.find(image_id);
  if (it == entries_.end()) throw Error(ErrorCode::UnknownTask, "no task for image '" + image_id + "'");
  const Entry& entry = it->second;
  {
    std::shared_lock lock(state_mutex_);
    if (completed_.contains({annotator_id, image_id})) {
      throw Error(ErrorCode::DuplicateSubmission,
                  "'" + annotator_id + "' already ranked '" + image_id + "'");
    }
  }

  std::map<std::string, std::size_t> model_of_label;
  for (std::size_t i = 0; i < entry.presentation.size(); ++i) {
    model_of_label[blind_label(i)] = entry.presentation[i];
  }
  std::set<std::string> given(ordered_labels.begin(), ordered_labels.end());
  const bool exact = given.size() == ordered_labels.size() &&
                     ordered_labels.size() == model_of_label.size() &&
                     std::all_of(given.begin(), given.end(),
                                 [&](const auto& l) { return model_of_label.contains(l); });
  if (!exact) {
    throw Error(ErrorCode::LabelMismatch, "ordering must list each candidate label exactly once");
  }

  HumanRanking ranking;
  ranking.image_id = image_id;
  ranking.annotator_id = annotator_id;
  for (const auto& label : ordered_labels) {
    ranking.ordering.push_back(config_.models[model_of_label.at(label)].name);
  }
  ranking.timestamp = utc_timestamp_now();
  ranking.validate();

  append_durably(ranking_to_json_line(ranking));
  std::unique_lock lock(state_mutex_);
  completed_.emplace(annotator_id, image_id);
  rankings_.push_back(ranking);
  return ranking;
}

std::vector<std::uint8_t> ReviewSession::serve_asset(const std::string& handle) const {
  const auto it = assets_.find(handle);
  if (it == assets_.end()) throw Error(ErrorCode::UnknownHandle, "unknown asset handle");
  const Entry& entry = entries_.at(it->second.image_id);
  const RgbImage image = load_rgb_image(config_.manifest.resolve(entry.record->image));
  if (!it->second.model) return encode_rgb_png(image);
  const AlphaMask alpha = load_mask(entry.predictions[*it->second.model]);
  return encode_rgb_png(composite_over_checkerboard(image, alpha));
}

const std::map<MetricId, double>& ReviewSession::scores_for(const std::string& image_id,
                                                            std::size_t model) const {
  const auto key = std::make_pair(image_id, model);
  {
    std::lock_guard lock(score_mutex_);
    const auto it = scores_.find(key);
    if (it != scores_.end()) return it->second;
  }
  const Entry& entry = entries_.at(image_id);
  const MaskPair pair(load_mask(entry.predictions[model]),
                      load_mask(config_.manifest.resolve(entry.record->mask)));
  std::map<MetricId, double> values;
  for (const auto& result : evaluate_all(pair, config_.eval)) {
    if (result.value) values[result.id] = *result.value;
  }
  std::lock_guard lock(score_mutex_);
  return scores_.emplace(key, std::move(values)).first->second;
}

ConcordanceReport ReviewSession::live_concordance(TiePolicy tie_policy) const {
  const auto submitted = rankings();
  std::map<std::string, std::size_t> model_index;
  for (std::size_t m = 0; m < config_.models.size(); ++m) model_index[config_.models[m].name] = m;
  ScoreTable table;
  for (const auto& r : submitted) {
    if (!entries_.contains(r.image_id)) continue;
    for (const auto& name : r.ordering) {
      const auto m = model_index.find(name);
      if (m == model_index.end()) continue;
      table[r.image_id][name] = scores_for(r.image_id, m->second);
    }
  }
  return compute_concordance(submitted, table, tie_policy);
}

// ---- HTTP ----------------------------------------------------------------------------

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownTask:
    case ErrorCode::UnknownHandle:
      return 404;
    case ErrorCode::DuplicateSubmission:
    case ErrorCode::NoComparablePairs:
      return 409;
    case ErrorCode::LabelMismatch:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DecodeError:
      return 400;
    default:
      return 500;
  }
}

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& msg) {
  send_json(res, status, {{"error", std::string(code)}, {"message", msg}});
}

template <typename Fn>
void guarded(httplib::Response& res, Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, status_for(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "Internal", e.what());
  }
}

constexpr const char* kPlaceholderPage =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>toonbench review</title></head>"
    "<body><p>The ranking UI bundle is not installed. The JSON API is available under "
    "<code>/api/</code>.</p></body></html>";

}  // namespace

struct ReviewServer::Impl {
  ReviewSession& session;
  httplib::Server server;
  explicit Impl(ReviewSession& s) : session(s) {}
};

ReviewServer::ReviewServer(ReviewSession& session, std::optional<fs::path> ui_dir)
    : impl_(std::make_unique<Impl>(session)) {
  auto& srv = impl_->server;
  ReviewSession& s = session;

  srv.Get("/api/task", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string annotator = req.get_param_value("annotator");
      if (annotator.empty()) {
        throw Error(ErrorCode::InvalidArgument, "annotator query parameter is required");
      }
      const auto task = s.next_task(annotator);
      if (!task) {
        send_json(res, 200, {{"done", true}, {"completed", s.completed_count(annotator)}});
        return;
      }
      nlohmann::ordered_json candidates = nlohmann::ordered_json::array();
      for (const auto& c : task->candidates) {
        candidates.push_back({{"label", c.label}, {"handle", c.handle}});
      }
      send_json(res, 200,
                {{"done", false},
                 {"imageId", task->image_id},
                 {"original", task->original_handle},
                 {"candidates", candidates},
                 {"remaining", task->remaining},
                 {"total", s.image_count()}});
    });
  });

  srv.Post("/api/ranking", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      nlohmann::json body;
      std::string annotator, image;
      std::vector<std::string> ordering;
      try {
        body = nlohmann::json::parse(req.body);
        annotator = body.at("annotatorId").get<std::string>();
        image = body.at("imageId").get<std::string>();
        ordering = body.at("ordering").get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed ranking body: ") + e.what());
      }
      s.submit_ranking(annotator, image, ordering);
      const auto next = s.next_task(annotator);
      send_json(res, 200, {{"ok", true}, {"remaining", next ? next->remaining : 0}});
    });
  });

  srv.Get(R"(/api/asset/([^/]+))", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto bytes = s.serve_asset(req.matches[1].str());
      res.status = 200;
      res.set_header("Cache-Control", "no-store");
      res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
    });
  });

  srv.Get("/api/concordance", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      TiePolicy policy = TiePolicy::HalfCredit;
      if (req.has_param("ties")) {
        const auto parsed = parse_tie_policy(req.get_param_value("ties"));
        if (!parsed) throw Error(ErrorCode::InvalidArgument, "unknown tie policy");
        policy = *parsed;
      }
      res.status = 200;
      res.set_content(concordance_to_json(s.live_concordance(policy)), "application/json");
    });
  });

  bool mounted = false;
  if (ui_dir) {
    if (!fs::is_directory(*ui_dir)) {
      throw Error(ErrorCode::FileNotFound, "UI directory " + ui_dir->string());
    }
    mounted = srv.set_mount_point("/", ui_dir->string());
  }
  if (!mounted) {
    srv.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html");
    });
  }
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
  }
  return bound;
}

void ReviewServer::run() { impl_->server.listen_after_bind(); }

void ReviewServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace toonbench
