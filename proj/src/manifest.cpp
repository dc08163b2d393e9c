#include "textsr/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "textsr/error.hpp"

namespace textsr::dataset {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "textsr-manifest/1";

template <typename E>
E parse_enum(std::optional<E> v, const std::string& text, const char* what) {
  if (!v) throw FormatError(std::string("unknown ") + what + " '" + text + "'");
  return *v;
}

json counts_json(const ManifestCounts& c) {
  return {{"crops", c.crops},       {"auto_pass", c.auto_pass}, {"auto_fail", c.auto_fail},
          {"pending", c.pending},   {"accepted", c.accepted},   {"rejected", c.rejected},
          {"degraded", c.degraded}, {"train", c.train},         {"test", c.test}};
}

ManifestCounts counts_from_json(const json& j) {
  ManifestCounts c;
  c.crops = j.at("crops");
  c.auto_pass = j.at("auto_pass");
  c.auto_fail = j.at("auto_fail");
  c.pending = j.at("pending");
  c.accepted = j.at("accepted");
  c.rejected = j.at("rejected");
  c.degraded = j.at("degraded");
  c.train = j.at("train");
  c.test = j.at("test");
  return c;
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kPending: return "pending";
    case Verdict::kAccepted: return "accepted";
    case Verdict::kRejected: return "rejected";
  }
  return "?";
}

std::string_view to_string(AutoVerdict v) { return v == AutoVerdict::kPass ? "pass" : "fail"; }

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kNone: return "none";
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
  }
  return "?";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  if (s == "pending") return Verdict::kPending;
  if (s == "accepted") return Verdict::kAccepted;
  if (s == "rejected") return Verdict::kRejected;
  return std::nullopt;
}

std::optional<AutoVerdict> auto_verdict_from_string(std::string_view s) {
  if (s == "pass") return AutoVerdict::kPass;
  if (s == "fail") return AutoVerdict::kFail;
  return std::nullopt;
}

std::optional<Split> split_from_string(std::string_view s) {
  if (s == "none") return Split::kNone;
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  return std::nullopt;
}

ManifestCounts recount(const std::vector<ManifestEntry>& entries) {
  ManifestCounts c;
  for (const auto& e : entries) {
    ++c.crops;
    (e.auto_verdict == AutoVerdict::kPass ? c.auto_pass : c.auto_fail)++;
    switch (e.human_verdict) {
      case Verdict::kPending: ++c.pending; break;
      case Verdict::kAccepted: ++c.accepted; break;
      case Verdict::kRejected: ++c.rejected; break;
    }
    if (!e.lr_path.empty()) ++c.degraded;
    if (e.split == Split::kTrain) ++c.train;
    if (e.split == Split::kTest) ++c.test;
  }
  return c;
}

void refresh_counts(DatasetManifest& m) { m.counts = recount(m.entries); }

void check_invariants(const DatasetManifest& m) {
  std::set<std::string> ids;
  for (const auto& e : m.entries) {
    if (!ids.insert(e.crop_id).second) throw FormatError("duplicate crop id " + e.crop_id);
    if (e.human_verdict == Verdict::kAccepted && (e.hr_path.empty() || e.lr_path.empty())) {
      throw FormatError("accepted crop " + e.crop_id + " lacks an HR or LR path");
    }
  }
  if (!(recount(m.entries) == m.counts)) {
    throw FormatError("manifest counts summary does not match its entries");
  }
}

json entry_to_json(const ManifestEntry& e) {
  json anns = json::array();
  for (const auto& a : e.annotations) anns.push_back(a);
  json j = {{"kind", "crop"},
            {"crop_id", e.crop_id},
            {"source_id", e.source_id},
            {"crop", {{"x", e.crop.x}, {"y", e.crop.y}, {"size", e.crop.size}, {"covered", e.crop.covered}}},
            {"annotations", anns},
            {"quality_score", e.quality_score ? json(*e.quality_score) : json(nullptr)},
            {"auto_verdict", to_string(e.auto_verdict)},
            {"human_verdict", to_string(e.human_verdict)},
            {"recipe_ref", e.recipe_ref},
            {"hr_path", e.hr_path},
            {"lr_path", e.lr_path},
            {"split", to_string(e.split)}};
  if (!e.gate_reason.empty()) j["gate_reason"] = e.gate_reason;
  return j;
}

ManifestEntry entry_from_json(const json& j) {
  ManifestEntry e;
  e.crop_id = j.at("crop_id").get<std::string>();
  e.source_id = j.at("source_id").get<std::string>();
  const auto& c = j.at("crop");
  e.crop.x = c.at("x");
  e.crop.y = c.at("y");
  e.crop.size = c.at("size");
  e.crop.covered = c.at("covered").get<std::vector<std::size_t>>();
  for (const auto& a : j.at("annotations")) e.annotations.push_back(a.get<TextLineAnnotation>());
  if (!j.at("quality_score").is_null()) e.quality_score = j.at("quality_score").get<double>();
  if (j.contains("gate_reason")) e.gate_reason = j.at("gate_reason").get<std::string>();
  const auto av = j.at("auto_verdict").get<std::string>();
  e.auto_verdict = parse_enum(auto_verdict_from_string(av), av, "auto verdict");
  const auto hv = j.at("human_verdict").get<std::string>();
  e.human_verdict = parse_enum(verdict_from_string(hv), hv, "verdict");
  e.recipe_ref = j.at("recipe_ref").get<std::string>();
  e.hr_path = j.at("hr_path").get<std::string>();
  e.lr_path = j.at("lr_path").get<std::string>();
  const auto sp = j.at("split").get<std::string>();
  e.split = parse_enum(split_from_string(sp), sp, "split");
  return e;
}

std::string serialize_manifest(const DatasetManifest& m) {
  const json header = {
      {"kind", "header"},
      {"format", kFormat},
      {"config_hash", m.config_hash},
      {"threshold", m.threshold},
      {"split", {{"seed", m.split_seed}, {"test_size", m.test_size}}},
      {"sources",
       {{"images", m.sources.images},
        {"unreadable", m.sources.unreadable},
        {"ocr_valid", m.sources.ocr_valid},
        {"skipped_small", m.sources.skipped_small},
        {"dropped_overlap", m.sources.dropped_overlap}}},
      {"counts", counts_json(m.counts)}};
  std::string out = header.dump() + "\n";
  for (const auto& e : m.entries) out += entry_to_json(e).dump() + "\n";
  return out;
}

DatasetManifest parse_manifest(const std::string& text, const std::string& origin) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto kind = j.at("kind").get<std::string>();
      if (!have_header) {
        if (kind != "header") throw FormatError("first record must be the header");
        if (j.at("format").get<std::string>() != kFormat) {
          throw FormatError("unsupported manifest format " + j.at("format").dump());
        }
        m.config_hash = j.at("config_hash").get<std::string>();
        m.threshold = j.at("threshold").get<double>();
        m.split_seed = j.at("split").at("seed").get<std::uint64_t>();
        m.test_size = j.at("split").at("test_size").get<std::size_t>();
        const auto& s = j.at("sources");
        m.sources.images = s.at("images");
        m.sources.unreadable = s.at("unreadable");
        m.sources.ocr_valid = s.at("ocr_valid");
        m.sources.skipped_small = s.at("skipped_small");
        m.sources.dropped_overlap = s.at("dropped_overlap");
        m.counts = counts_from_json(j.at("counts"));
        have_header = true;
      } else {
        if (kind != "crop") throw FormatError("unexpected record kind '" + kind + "'");
        m.entries.push_back(entry_from_json(j));
      }
    } catch (const json::exception& e) {
      throw FormatError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw FormatError(origin + ": missing header record");
  check_invariants(m);
  return m;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path + ": " + ec.message());
}

void save_manifest(const std::string& path, const DatasetManifest& m) {
  check_invariants(m);
  write_file_atomic(path, serialize_manifest(m));
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path);
}

}  // namespace textsr::dataset
