#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "textsr/manifest.hpp"

namespace textsr::dataset {

struct DatasetStats {
  std::size_t entries = 0;
  std::size_t lines = 0;  // text-line instances over all entries
  std::map<std::string, std::size_t> by_language;  // zh, en, mixed, other always present
  std::map<std::string, std::size_t> by_scene;     // only tags seen; "untagged" for none
  std::map<std::string, std::size_t> by_split;     // none, train, test
  std::map<std::string, std::size_t> by_verdict;   // pending, accepted, rejected
  std::map<std::string, std::size_t> by_auto;      // pass, fail

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats dataset_statistics(const DatasetManifest& manifest);
nlohmann::json to_json(const DatasetStats& stats);
std::string format_stats(const DatasetStats& stats);

// Entries that may enter a split: passed the gate and not rejected.
bool split_eligible(const ManifestEntry& e);

// Seeded sample of up to `test_size` eligible entries for the test split,
// taken in whole source-image groups so no source feeds both splits. Other
// eligible entries become train; ineligible ones get Split::kNone. Throws
// ParameterError if test_size exceeds the eligible count.
void split_train_test(DatasetManifest& manifest, std::size_t test_size, std::uint64_t seed);

}  // namespace textsr::dataset
