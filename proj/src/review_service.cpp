#include "textsr/review_service.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include <httplib.h>

#include "textsr/error.hpp"
#include "textsr/quality.hpp"

namespace textsr::review {
namespace fs = std::filesystem;
using nlohmann::json;

std::optional<CommitPolicy> commit_policy_from_string(std::string_view s) {
  if (s == "reject-pending") return CommitPolicy::kRejectPending;
  if (s == "accept-pending") return CommitPolicy::kAcceptPending;
  return std::nullopt;
}

ReviewStore::ReviewStore(std::string manifest_path)
    : path_(std::move(manifest_path)), manifest_(dataset::load_manifest(path_)) {}

std::string ReviewStore::root_dir() const {
  const fs::path parent = fs::path(path_).parent_path();
  return parent.empty() ? "." : parent.string();
}

DatasetManifest ReviewStore::snapshot() const {
  std::shared_lock lock(mu_);
  return manifest_;
}

CropPage ReviewStore::list(const CropQuery& q) const {
  std::shared_lock lock(mu_);
  std::vector<const ManifestEntry*> hits;
  for (const auto& e : manifest_.entries) {
    if (q.verdict && e.human_verdict != *q.verdict) continue;
    if (q.auto_verdict && e.auto_verdict != *q.auto_verdict) continue;
    if ((q.min_score || q.max_score) && !e.quality_score) continue;
    if (q.min_score && *e.quality_score < *q.min_score) continue;
    if (q.max_score && *e.quality_score > *q.max_score) continue;
    hits.push_back(&e);
  }
  const double t = manifest_.threshold;
  // Unscored crops sort last.
  auto key = [&](const ManifestEntry* e) {
    if (!e->quality_score) return HUGE_VAL;
    return q.sort == "borderline" ? std::abs(*e->quality_score - t) : *e->quality_score;
  };
  if (q.sort == "score" || q.sort == "borderline") {
    std::stable_sort(hits.begin(), hits.end(),
                     [&](const ManifestEntry* a, const ManifestEntry* b) { return key(a) < key(b); });
  }
  CropPage page;
  page.total = hits.size();
  const std::size_t size = std::max<std::size_t>(1, q.page_size);
  const std::size_t begin = (std::max<std::size_t>(1, q.page) - 1) * size;
  for (std::size_t i = begin; i < hits.size() && i < begin + size; ++i) page.items.push_back(*hits[i]);
  return page;
}

std::optional<ManifestEntry> ReviewStore::get(const std::string& crop_id) const {
  std::shared_lock lock(mu_);
  for (const auto& e : manifest_.entries)
    if (e.crop_id == crop_id) return e;
  return std::nullopt;
}

std::size_t pass_count(const DatasetManifest& m, double threshold) {
  return static_cast<std::size_t>(std::count_if(m.entries.begin(), m.entries.end(), [&](const auto& e) {
    return e.quality_score && dataset::passes(*e.quality_score, threshold);
  }));
}

ThresholdPreview ReviewStore::threshold_preview(double t) const {
  std::shared_lock lock(mu_);
  ThresholdPreview p;
  p.threshold = t;
  for (const auto& e : manifest_.entries) {
    const bool pass = e.quality_score && dataset::passes(*e.quality_score, t);
    (pass ? p.pass : p.fail)++;
    if (pass != (e.auto_verdict == dataset::AutoVerdict::kPass)) p.changed.push_back(e.crop_id);
  }
  return p;
}

json ReviewStore::stats() const {
  std::shared_lock lock(mu_);
  const auto& c = manifest_.counts;
  return {{"config_hash", manifest_.config_hash},
          {"threshold", manifest_.threshold},
          {"counts",
           {{"crops", c.crops},
            {"auto_pass", c.auto_pass},
            {"auto_fail", c.auto_fail},
            {"pending", c.pending},
            {"accepted", c.accepted},
            {"rejected", c.rejected},
            {"degraded", c.degraded},
            {"train", c.train},
            {"test", c.test}}},
          {"dataset", dataset::to_json(dataset::dataset_statistics(manifest_))}};
}

ReviewStore::VerdictStatus ReviewStore::set_verdict(const std::string& crop_id, Verdict verdict) {
  std::unique_lock lock(mu_);
  auto it = std::find_if(manifest_.entries.begin(), manifest_.entries.end(),
                         [&](const auto& e) { return e.crop_id == crop_id; });
  if (it == manifest_.entries.end()) return VerdictStatus::kNotFound;
  if (verdict == Verdict::kAccepted && it->lr_path.empty()) return VerdictStatus::kNoLowRes;
  if (it->human_verdict == verdict) return VerdictStatus::kOk;
  DatasetManifest next = manifest_;
  next.entries[it - manifest_.entries.begin()].human_verdict = verdict;
  dataset::refresh_counts(next);
  dataset::save_manifest(path_, next);
  manifest_ = std::move(next);
  return VerdictStatus::kOk;
}

dataset::ManifestCounts ReviewStore::commit(CommitPolicy policy) {
  std::unique_lock lock(mu_);
  DatasetManifest next = manifest_;
  for (auto& e : next.entries) {
    if (e.human_verdict != Verdict::kPending) continue;
    const bool accept = policy == CommitPolicy::kAcceptPending && !e.lr_path.empty();
    e.human_verdict = accept ? Verdict::kAccepted : Verdict::kRejected;
  }
  std::size_t eligible = std::count_if(next.entries.begin(), next.entries.end(),
                                       [](const auto& e) { return dataset::split_eligible(e); });
  dataset::split_train_test(next, std::min(next.test_size, eligible), next.split_seed);
  dataset::save_manifest(path_, next);
  manifest_ = std::move(next);
  return manifest_.counts;
}

void ReviewStore::flush() {
  std::shared_lock lock(mu_);
  dataset::save_manifest(path_, manifest_);
}

json entry_payload(const ManifestEntry& e) {
  json j = dataset::entry_to_json(e);
  j.erase("kind");
  const std::string base = "/api/crops/" + e.crop_id + "/image?side=";
  j["hr_url"] = base + "hr";
  j["lr_url"] = e.lr_path.empty() ? json(nullptr) : json(base + "lr");
  json transcripts = json::array();
  for (const auto& a : e.annotations) transcripts.push_back(a.transcript);
  j["transcripts"] = transcripts;
  return j;
}

// ---------------------------------------------------------------------------

struct ReviewServer::Impl {
  ReviewStore& store;
  httplib::Server server;
  std::mutex state_mu;
  bool started = false;
  bool stopping = false;
  explicit Impl(ReviewStore& s) : store(s) {}
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

template <typename T>
std::optional<T> numeric_param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  const std::string v = req.get_param_value(key);
  std::istringstream in(v);
  T out{};
  in >> out;
  if (!in || !in.eof()) throw ParameterError(std::string("bad value for '") + key + "': " + v);
  return out;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ReviewServer::ReviewServer(ReviewStore& store) : impl_(std::make_unique<Impl>(store)) {
  auto& svr = impl_->server;
  ReviewStore& st = store;

  // httplib defaults to SO_REUSEPORT, which lets a second server share a busy
  // port silently.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const ParameterError& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  });

  svr.Get("/api/crops", [&st](const httplib::Request& req, httplib::Response& res) {
    CropQuery q;
    if (req.has_param("verdict")) {
      q.verdict = dataset::verdict_from_string(req.get_param_value("verdict"));
      if (!q.verdict) return send_error(res, 400, "verdict must be pending, accepted or rejected");
    }
    if (req.has_param("auto")) {
      q.auto_verdict = dataset::auto_verdict_from_string(req.get_param_value("auto"));
      if (!q.auto_verdict) return send_error(res, 400, "auto must be pass or fail");
    }
    q.min_score = numeric_param<double>(req, "min_score");
    q.max_score = numeric_param<double>(req, "max_score");
    if (auto p = numeric_param<std::size_t>(req, "page")) q.page = *p;
    if (auto p = numeric_param<std::size_t>(req, "page_size")) q.page_size = *p;
    if (req.has_param("sort")) q.sort = req.get_param_value("sort");
    if (q.sort != "id" && q.sort != "score" && q.sort != "borderline") {
      return send_error(res, 400, "sort must be id, score or borderline");
    }
    if (q.page == 0 || q.page_size == 0) return send_error(res, 400, "page and page_size start at 1");
    const CropPage page = st.list(q);
    json items = json::array();
    for (const auto& e : page.items) items.push_back(entry_payload(e));
    send_json(res, 200,
              {{"total", page.total}, {"page", q.page}, {"page_size", q.page_size}, {"items", items}});
  });

  svr.Get(R"(/api/crops/([^/]+)/image)", [&st](const httplib::Request& req, httplib::Response& res) {
    const auto entry = st.get(req.matches[1]);
    if (!entry) return send_error(res, 404, "unknown crop");
    const std::string side = req.has_param("side") ? req.get_param_value("side") : "hr";
    if (side != "hr" && side != "lr") return send_error(res, 400, "side must be hr or lr");
    const std::string& rel = side == "hr" ? entry->hr_path : entry->lr_path;
    if (rel.empty()) return send_error(res, 404, "no " + side + " image for this crop");
    const std::string bytes = read_bytes(fs::path(st.root_dir()) / rel);
    if (bytes.empty()) return send_error(res, 404, side + " image missing on disk");
    res.status = 200;
    res.set_content(bytes, "image/png");
  });

  svr.Get(R"(/api/crops/([^/]+))", [&st](const httplib::Request& req, httplib::Response& res) {
    const auto entry = st.get(req.matches[1]);
    if (!entry) return send_error(res, 404, "unknown crop");
    send_json(res, 200, entry_payload(*entry));
  });

  svr.Post(R"(/api/crops/([^/]+)/verdict)", [&st](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      return send_error(res, 400, "body must be JSON");
    }
    if (!body.is_object() || !body.contains("verdict") || !body["verdict"].is_string()) {
      return send_error(res, 400, "expected {\"verdict\": \"accepted|rejected|pending\"}");
    }
    const auto v = dataset::verdict_from_string(body["verdict"].get<std::string>());
    if (!v) return send_error(res, 400, "verdict must be pending, accepted or rejected");
    const std::string id = req.matches[1];
    switch (st.set_verdict(id, *v)) {
      case ReviewStore::VerdictStatus::kNotFound: return send_error(res, 404, "unknown crop");
      case ReviewStore::VerdictStatus::kNoLowRes:
        return send_error(res, 409, "crop has no LR image (failed the quality gate)");
      case ReviewStore::VerdictStatus::kOk: break;
    }
    send_json(res, 200, entry_payload(*st.get(id)));
  });

  svr.Get("/api/threshold-preview", [&st](const httplib::Request& req, httplib::Response& res) {
    const auto t = numeric_param<double>(req, "t");
    if (!t) return send_error(res, 400, "missing t");
    const ThresholdPreview p = st.threshold_preview(*t);
    send_json(res, 200,
              {{"threshold", p.threshold}, {"pass", p.pass}, {"fail", p.fail}, {"changed", p.changed}});
  });

  svr.Get("/api/stats", [&st](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, st.stats());
  });

  svr.Post("/api/commit", [&st](const httplib::Request& req, httplib::Response& res) {
    std::string policy_name = "reject-pending";
    if (!req.body.empty()) {
      try {
        const json body = json::parse(req.body);
        if (body.contains("policy")) policy_name = body.at("policy").get<std::string>();
      } catch (const json::exception&) {
        return send_error(res, 400, "body must be JSON");
      }
    }
    const auto policy = commit_policy_from_string(policy_name);
    if (!policy) return send_error(res, 400, "policy must be reject-pending or accept-pending");
    st.commit(*policy);
    send_json(res, 200, st.stats());
  });
}

ReviewServer::~ReviewServer() = default;

int ReviewServer::bind(const ServeOptions& options) {
  auto& svr = impl_->server;
  if (!options.static_dir.empty() && !svr.set_mount_point("/", options.static_dir)) {
    throw IoError("static directory not found: " + options.static_dir);
  }
  if (options.port == 0) {
    const int port = svr.bind_to_any_port(options.host);
    if (port < 0) throw IoError("cannot bind " + options.host);
    return port;
  }
  if (!svr.bind_to_port(options.host, options.port)) {
    throw IoError("cannot bind " + options.host + ":" + std::to_string(options.port));
  }
  return options.port;
}

void ReviewServer::run() {
  {
    std::lock_guard lock(impl_->state_mu);
    if (impl_->stopping) return;
    impl_->started = true;
  }
  impl_->server.listen_after_bind();
  impl_->store.flush();
}

void ReviewServer::stop() {
  bool started;
  {
    std::lock_guard lock(impl_->state_mu);
    impl_->stopping = true;
    started = impl_->started;
  }
  // httplib ignores stop() until the accept loop is up.
  if (started) impl_->server.wait_until_ready();
  impl_->server.stop();
}

}  // namespace textsr::review
