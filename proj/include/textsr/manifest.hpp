#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "textsr/annotation.hpp"
#include "textsr/crops.hpp"

namespace textsr::dataset {

enum class Verdict : std::uint8_t { kPending, kAccepted, kRejected };
enum class AutoVerdict : std::uint8_t { kPass, kFail };
enum class Split : std::uint8_t { kNone, kTrain, kTest };

std::string_view to_string(Verdict v);
std::string_view to_string(AutoVerdict v);
std::string_view to_string(Split s);
std::optional<Verdict> verdict_from_string(std::string_view s);
std::optional<AutoVerdict> auto_verdict_from_string(std::string_view s);
std::optional<Split> split_from_string(std::string_view s);

struct ManifestEntry {
  std::string crop_id;
  std::string source_id;
  CropSpec crop;
  std::vector<TextLineAnnotation> annotations;  // crop coordinates
  std::optional<double> quality_score;
  std::string gate_reason;  // set when scoring failed
  AutoVerdict auto_verdict = AutoVerdict::kFail;
  Verdict human_verdict = Verdict::kPending;
  std::string recipe_ref;  // "recipes.jsonl:<line>", empty without LR
  std::string hr_path;     // relative to the manifest directory
  std::string lr_path;     // empty unless degraded
  Split split = Split::kNone;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// Tallies derived from the entries alone.
struct ManifestCounts {
  std::size_t crops = 0;
  std::size_t auto_pass = 0;
  std::size_t auto_fail = 0;
  std::size_t pending = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t degraded = 0;
  std::size_t train = 0;
  std::size_t test = 0;

  friend bool operator==(const ManifestCounts&, const ManifestCounts&) = default;
};

// Per-source-image outcomes from ingest and cropping.
struct SourceCounts {
  std::size_t images = 0;
  std::size_t unreadable = 0;
  std::size_t ocr_valid = 0;
  std::size_t skipped_small = 0;
  std::size_t dropped_overlap = 0;

  friend bool operator==(const SourceCounts&, const SourceCounts&) = default;
};

struct DatasetManifest {
  std::string config_hash;
  double threshold = 4.25;
  std::uint64_t split_seed = 0;
  std::size_t test_size = 0;
  SourceCounts sources;
  ManifestCounts counts;
  std::vector<ManifestEntry> entries;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

ManifestCounts recount(const std::vector<ManifestEntry>& entries);

// Sets counts from the entries.
void refresh_counts(DatasetManifest& manifest);

// Throws FormatError on duplicate ids, stale counts, or accepted entries
// missing an HR or LR path.
void check_invariants(const DatasetManifest& manifest);

nlohmann::json entry_to_json(const ManifestEntry& e);
ManifestEntry entry_from_json(const nlohmann::json& j);

// Line 1: header {"kind": "header", "format": ..., "config_hash": ...,
// "threshold", "split": {...}, "sources": {...}, "counts": {...}}; then one
// {"kind": "crop", ...} object per line.
std::string serialize_manifest(const DatasetManifest& manifest);
DatasetManifest parse_manifest(const std::string& text, const std::string& origin = "manifest");

// Writes to a temporary sibling and renames it into place.
void save_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::string& path);

void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace textsr::dataset
