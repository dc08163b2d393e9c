#include "textsr/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "textsr/error.hpp"
#include "textsr/image.hpp"

namespace textsr::dataset {
namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

std::string sidecar_path(const std::string& image_path) {
  fs::path p(image_path);
  p.replace_extension(".jsonl");
  return p.string();
}

std::vector<TextLineAnnotation> parse_sidecar(const std::string& text, const std::string& origin) {
  std::vector<TextLineAnnotation> out;
  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    TextLineAnnotation a;
    try {
      a = nlohmann::json::parse(line).get<TextLineAnnotation>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (a.transcript.empty()) throw FormatError(where + ": empty transcript");
    if (!is_simple(a.quad)) throw FormatError(where + ": self-intersecting quad");
    out.push_back(std::move(a));
  }
  return out;
}

std::string format_sidecar(const std::vector<TextLineAnnotation>& annotations) {
  std::string out;
  for (const auto& a : annotations) out += nlohmann::json(a).dump() + "\n";
  return out;
}

std::vector<TextLineAnnotation> SidecarOcrProvider::annotations(const std::string& image_path) const {
  const std::string path = sidecar_path(image_path);
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sidecar(buf.str(), path);
}

std::string record_id(const std::string& relative_path) {
  fs::path p(relative_path);
  p.replace_extension();
  std::string id = p.generic_string();
  for (char& c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return id;
}

IngestResult ingest(const std::string& root, const OcrProvider& ocr) {
  if (!fs::is_directory(root)) throw IoError("source directory not found: " + root);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  IngestResult result;
  std::set<std::string> used_ids;
  for (const auto& file : files) {
    const std::string rel = fs::relative(file, root).generic_string();
    ImageRecord rec;
    rec.id = record_id(rel);
    // a.png and a.jpg side by side
    if (!used_ids.insert(rec.id).second) {
      rec.id += "_" + file.extension().string().substr(1);
      used_ids.insert(rec.id);
    }
    rec.source_path = fs::absolute(file).lexically_normal().string();
    try {
      const ImageSize size = read_image_size(rec.source_path);
      rec.width = size.width;
      rec.height = size.height;
    } catch (const Error& e) {
      result.warnings.push_back(rel + ": unreadable image skipped (" + e.what() + ")");
      ++result.unreadable;
      continue;
    }
    auto anns = ocr.annotations(rec.source_path);
    for (std::size_t i = 0; i < anns.size(); ++i) {
      auto& a = anns[i];
      if (clamp_quad(a.quad, rec.width, rec.height)) {
        result.warnings.push_back(rel + ": annotation " + std::to_string(i) +
                                  " clamped to image bounds");
      }
      if (area(a.quad) <= 0.0) {
        result.warnings.push_back(rel + ": annotation " + std::to_string(i) +
                                  " has zero area after clamping; dropped");
        continue;
      }
      make_clockwise(a.quad);
      rec.annotations.push_back(std::move(a));
    }
    rec.ocr_valid = !rec.annotations.empty();
    result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace textsr::dataset
