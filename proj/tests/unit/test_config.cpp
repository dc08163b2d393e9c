#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "textsr/config.hpp"
#include "textsr/error.hpp"

using namespace textsr;
using nlohmann::json;
namespace fs = std::filesystem;

TEST_SUITE("config") {

TEST_CASE("hash ignores key order, jobs and output_dir") {
  const auto a = config_from_json(json::parse(R"({"source_dir": "/s", "output_dir": "/o", "seed": 5, "threshold": 4.0})"));
  const auto b = config_from_json(json::parse(R"({"threshold": 4.0, "seed": 5, "output_dir": "/elsewhere", "source_dir": "/s", "jobs": 8})"));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);

  auto c = a;
  c.threshold = 4.25;
  CHECK(config_hash(c) != config_hash(a));
  c = a;
  c.seed = 6;
  CHECK(config_hash(c) != config_hash(a));
  c = a;
  c.ranges.first.jpeg_min = 40;
  CHECK(config_hash(c) != config_hash(a));
}

TEST_CASE("round trip through JSON") {
  PipelineConfig c;
  c.source_dir = "/data/src";
  c.output_dir = "/data/out";
  c.seed = 99;
  c.threshold = 3.5;
  c.test_size = 12;
  c.jobs = 3;
  const auto back = config_from_json(to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(back.jobs == 3);
  CHECK(back.output_dir == "/data/out");
}

TEST_CASE("unknown keys and bad types are rejected") {
  CHECK_THROWS_WITH_AS(config_from_json(json::parse(R"({"source_dir": "/s", "treshold": 4})")),
                       doctest::Contains("treshold"), FormatError);
  CHECK_THROWS_WITH_AS(config_from_json(json::parse(R"({"seed": "seven"})")), doctest::Contains("seed"),
                       FormatError);
  CHECK_THROWS_AS(config_from_json(json::parse("[1, 2]")), FormatError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"degradation_ranges": {}, "degradation_ranges_file": "x"})")),
                  FormatError);
}

TEST_CASE("validation names the field") {
  PipelineConfig c;
  c.source_dir = "/s";
  c.output_dir = "/o";
  CHECK_NOTHROW(validate(c));
  auto bad = c;
  bad.threshold = -1;
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("threshold"), ParameterError);
  bad = c;
  bad.scale = 3;  // 512 % 3 != 0
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("crop_size"), ParameterError);
  bad = c;
  bad.jobs = 0;
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("jobs"), ParameterError);
  bad = c;
  bad.scorer = "lpips";
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("lpips"), ParameterError);
  bad = c;
  bad.source_dir.clear();
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("source_dir"), ParameterError);
}

TEST_CASE("load_config resolves paths against the file's directory") {
  const auto dir = fixtures::temp_dir("config");
  fs::create_directories(dir + "/cfg");
  std::ofstream(dir + "/cfg/ranges.json") << json(degradation::DegradationRanges::defaults()).dump();
  std::ofstream(dir + "/cfg/c.json")
      << R"({"source_dir": "../src", "output_dir": "out", "degradation_ranges_file": "ranges.json"})";
  const auto c = load_config(dir + "/cfg/c.json");
  CHECK(fs::path(c.source_dir) == fs::path(dir + "/src").lexically_normal());
  CHECK(fs::path(c.output_dir) == fs::path(dir + "/cfg/out").lexically_normal());
  CHECK(json(c.ranges) == json(degradation::DegradationRanges::defaults()));

  std::ofstream(dir + "/cfg/missing.json") << R"({"degradation_ranges_file": "nope.json"})";
  CHECK_THROWS_AS(load_config(dir + "/cfg/missing.json"), IoError);
  std::ofstream(dir + "/cfg/broken.json") << "{";
  CHECK_THROWS_WITH_AS(load_config(dir + "/cfg/broken.json"), doctest::Contains("broken.json"), FormatError);
  CHECK_THROWS_AS(load_config(dir + "/cfg/absent.json"), IoError);
  fs::remove_all(dir);
}

}  // TEST_SUITE
