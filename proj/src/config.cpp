#include "textsr/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "textsr/error.hpp"
#include "textsr/rng.hpp"

namespace textsr {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const std::string& p, const std::string& base) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base) / path).lexically_normal().string();
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

void validate(const PipelineConfig& c) {
  if (c.source_dir.empty()) throw ParameterError("config: source_dir is required");
  if (c.output_dir.empty()) throw ParameterError("config: output_dir is required");
  if (!(c.threshold >= 0.0)) throw ParameterError("config: threshold must be >= 0");
  if (c.scale < 1) throw ParameterError("config: scale must be >= 1");
  if (c.crop_size < 8 || c.crop_size % c.scale != 0) {
    throw ParameterError("config: crop_size must be >= 8 and divisible by scale");
  }
  if (!(c.max_crop_iou >= 0.0 && c.max_crop_iou <= 1.0)) {
    throw ParameterError("config: max_crop_iou must be in [0, 1]");
  }
  if (c.ocr_provider != "sidecar") {
    throw ParameterError("config: unknown ocr_provider '" + c.ocr_provider + "'");
  }
  if (c.scorer != "laplacian") throw ParameterError("config: unknown scorer '" + c.scorer + "'");
  if (c.jobs < 1) throw ParameterError("config: jobs must be >= 1");
}

PipelineConfig config_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  static const std::set<std::string> known = {
      "source_dir", "output_dir",   "seed",         "threshold",
      "scale",      "test_size",    "crop_size",    "max_crop_iou",
      "ocr_provider", "scorer",     "jobs",         "degradation_ranges",
      "degradation_ranges_file"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw FormatError("config: unknown key '" + key + "'");

  PipelineConfig c;
  read_field(j, "source_dir", c.source_dir);
  read_field(j, "output_dir", c.output_dir);
  read_field(j, "seed", c.seed);
  read_field(j, "threshold", c.threshold);
  read_field(j, "scale", c.scale);
  read_field(j, "test_size", c.test_size);
  read_field(j, "crop_size", c.crop_size);
  read_field(j, "max_crop_iou", c.max_crop_iou);
  read_field(j, "ocr_provider", c.ocr_provider);
  read_field(j, "scorer", c.scorer);
  read_field(j, "jobs", c.jobs);
  c.source_dir = resolve(c.source_dir, base_dir);
  c.output_dir = resolve(c.output_dir, base_dir);

  if (j.contains("degradation_ranges") && j.contains("degradation_ranges_file")) {
    throw FormatError("config: give degradation_ranges or degradation_ranges_file, not both");
  }
  try {
    if (j.contains("degradation_ranges")) {
      c.ranges = j.at("degradation_ranges").get<degradation::DegradationRanges>();
    } else if (j.contains("degradation_ranges_file")) {
      const std::string path = resolve(j.at("degradation_ranges_file").get<std::string>(), base_dir);
      std::ifstream in(path);
      if (!in) throw IoError("cannot open degradation ranges " + path);
      c.ranges = json::parse(in).get<degradation::DegradationRanges>();
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: degradation ranges: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  const fs::path parent = fs::path(path).parent_path();
  return config_from_json(j, parent.empty() ? "." : parent.string());
}

json to_json(const PipelineConfig& c) {
  return {{"source_dir", c.source_dir},
          {"output_dir", c.output_dir},
          {"seed", c.seed},
          {"threshold", c.threshold},
          {"scale", c.scale},
          {"test_size", c.test_size},
          {"crop_size", c.crop_size},
          {"max_crop_iou", c.max_crop_iou},
          {"ocr_provider", c.ocr_provider},
          {"scorer", c.scorer},
          {"jobs", c.jobs},
          {"degradation_ranges", c.ranges}};
}

std::string config_hash(const PipelineConfig& c) {
  json j = to_json(c);
  j.erase("jobs");
  j.erase("output_dir");
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  const std::uint64_t h = fnv1a(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace textsr
