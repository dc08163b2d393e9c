#pragma once

#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textsr/manifest.hpp"
#include "textsr/statistics.hpp"

namespace textsr::review {

using dataset::DatasetManifest;
using dataset::ManifestEntry;
using dataset::Verdict;

struct CropQuery {
  std::optional<Verdict> verdict;
  std::optional<dataset::AutoVerdict> auto_verdict;
  std::optional<double> min_score;
  std::optional<double> max_score;
  std::string sort = "id";  // id | score | borderline (|score - threshold| ascending)
  std::size_t page = 1;     // 1-based
  std::size_t page_size = 24;
};

struct CropPage {
  std::size_t total = 0;  // matches before paging
  std::vector<ManifestEntry> items;
};

struct ThresholdPreview {
  double threshold = 0.0;
  std::size_t pass = 0;
  std::size_t fail = 0;  // includes crops without a score
  // Crops whose gate outcome at `threshold` differs from the manifest's.
  std::vector<std::string> changed;
};

enum class CommitPolicy { kRejectPending, kAcceptPending };

std::optional<CommitPolicy> commit_policy_from_string(std::string_view s);

// Thread-safe view of a manifest file. Reads share a lock; every mutation
// takes the exclusive lock and rewrites the manifest atomically before
// returning, so acknowledged verdicts survive a restart.
class ReviewStore {
 public:
  explicit ReviewStore(std::string manifest_path);

  const std::string& manifest_path() const { return path_; }
  std::string root_dir() const;

  DatasetManifest snapshot() const;
  CropPage list(const CropQuery& query) const;
  std::optional<ManifestEntry> get(const std::string& crop_id) const;
  ThresholdPreview threshold_preview(double t) const;
  nlohmann::json stats() const;

  enum class VerdictStatus { kOk, kNotFound, kNoLowRes };
  VerdictStatus set_verdict(const std::string& crop_id, Verdict verdict);

  // Resolves every pending entry (auto-fail crops are always rejected,
  // since they have no LR image), re-splits, and persists.
  dataset::ManifestCounts commit(CommitPolicy policy);

  void flush();

 private:
  std::string path_;
  mutable std::shared_mutex mu_;
  DatasetManifest manifest_;
};

// Threshold-preview pass count computed straight from the manifest; used
// to cross-check the service against the pipeline's quality gate.
std::size_t pass_count(const DatasetManifest& manifest, double threshold);

nlohmann::json entry_payload(const ManifestEntry& e);

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8765;
  std::string static_dir;  // optional UI assets mounted at /
};

class ReviewServer {
 public:
  explicit ReviewServer(ReviewStore& store);
  ~ReviewServer();

  // Binds the socket; returns the bound port, or throws IoError.
  int bind(const ServeOptions& options);
  // Blocks until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace textsr::review
