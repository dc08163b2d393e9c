#include "textsr/statistics.hpp"

#include <algorithm>
#include <sstream>

#include "textsr/error.hpp"
#include "textsr/rng.hpp"

namespace textsr::dataset {

DatasetStats dataset_statistics(const DatasetManifest& m) {
  DatasetStats s;
  for (auto lang : {Language::kZh, Language::kEn, Language::kMixed, Language::kOther})
    s.by_language[std::string(to_string(lang))] = 0;
  for (auto sp : {Split::kNone, Split::kTrain, Split::kTest}) s.by_split[std::string(to_string(sp))] = 0;
  for (auto v : {Verdict::kPending, Verdict::kAccepted, Verdict::kRejected})
    s.by_verdict[std::string(to_string(v))] = 0;
  for (auto a : {AutoVerdict::kPass, AutoVerdict::kFail}) s.by_auto[std::string(to_string(a))] = 0;

  for (const auto& e : m.entries) {
    ++s.entries;
    ++s.by_split[std::string(to_string(e.split))];
    ++s.by_verdict[std::string(to_string(e.human_verdict))];
    ++s.by_auto[std::string(to_string(e.auto_verdict))];
    for (const auto& a : e.annotations) {
      ++s.lines;
      ++s.by_language[std::string(to_string(a.language))];
      ++s.by_scene[a.scene.value_or("untagged")];
    }
  }
  return s;
}

nlohmann::json to_json(const DatasetStats& s) {
  return {{"entries", s.entries},     {"lines", s.lines},         {"by_language", s.by_language},
          {"by_scene", s.by_scene},   {"by_split", s.by_split},   {"by_verdict", s.by_verdict},
          {"by_auto", s.by_auto}};
}

std::string format_stats(const DatasetStats& s) {
  std::ostringstream out;
  out << "entries " << s.entries << ", text lines " << s.lines << "\n";
  auto section = [&](const char* title, const std::map<std::string, std::size_t>& m) {
    out << title << ":";
    for (const auto& [k, v] : m) out << " " << k << "=" << v;
    out << "\n";
  };
  section("language", s.by_language);
  section("scene", s.by_scene);
  section("split", s.by_split);
  section("verdict", s.by_verdict);
  section("auto", s.by_auto);
  return out.str();
}

bool split_eligible(const ManifestEntry& e) {
  return e.auto_verdict == AutoVerdict::kPass && e.human_verdict != Verdict::kRejected;
}

void split_train_test(DatasetManifest& m, std::size_t test_size, std::uint64_t seed) {
  // source id -> eligible entry indices, in first-appearance order
  std::vector<std::string> sources;
  std::map<std::string, std::vector<std::size_t>> groups;
  std::size_t eligible = 0;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    auto& e = m.entries[i];
    e.split = Split::kNone;
    if (!split_eligible(e)) continue;
    ++eligible;
    auto [it, inserted] = groups.try_emplace(e.source_id);
    if (inserted) sources.push_back(e.source_id);
    it->second.push_back(i);
  }
  if (test_size > eligible) {
    throw ParameterError("test_size " + std::to_string(test_size) + " exceeds the " +
                         std::to_string(eligible) + " eligible crops");
  }
  Rng rng(mix_seed(seed, fnv1a("split")));
  for (std::size_t i = sources.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(sources[i - 1], sources[j]);
  }
  std::size_t taken = 0;
  for (const auto& src : sources) {
    const auto& idx = groups[src];
    const bool to_test = taken + idx.size() <= test_size;
    if (to_test) taken += idx.size();
    for (auto i : idx) m.entries[i].split = to_test ? Split::kTest : Split::kTrain;
  }
  m.split_seed = seed;
  m.test_size = test_size;
  refresh_counts(m);
}

}  // namespace textsr::dataset
