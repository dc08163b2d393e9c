#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "selftest.hpp"
#include "textsr/canny.hpp"
#include "textsr/config.hpp"
#include "textsr/error.hpp"
#include "textsr/losses.hpp"
#include "textsr/manifest.hpp"
#include "textsr/mask.hpp"
#include "textsr/ocr_eval.hpp"
#include "textsr/pipeline.hpp"
#include "textsr/quality_metrics.hpp"
#include "textsr/recipe.hpp"
#include "textsr/statistics.hpp"

namespace py = pybind11;
using namespace textsr;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Mask = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

// (H, W) or (H, W, C) float array in [0, 1].
Image to_image(const Array& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw py::value_error("expected an (H, W) or (H, W, C) array");
  Image img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
            a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1);
  std::copy(a.data(), a.data() + a.size(), img.pixels.begin());
  return img;
}

Array to_array(const Image& img) {
  std::vector<py::ssize_t> shape{img.height, img.width};
  if (img.channels != 1) shape.push_back(img.channels);
  Array out(shape);
  std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
  return out;
}

metrics::BinaryMap to_map(const Mask& m) {
  if (m.ndim() != 2) throw py::value_error("expected an (H, W) mask");
  metrics::BinaryMap map(static_cast<int>(m.shape(0)), static_cast<int>(m.shape(1)));
  for (py::ssize_t i = 0; i < m.size(); ++i) map.values[i] = m.data()[i] != 0;
  return map;
}

Mask to_mask(const metrics::BinaryMap& map) {
  Mask out({map.height, map.width});
  std::copy(map.values.begin(), map.values.end(), out.mutable_data());
  return out;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the textsr toolkit";

  // Translators run newest first, so the base class goes in first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("read_image", [](const std::string& path) { return to_array(read_image(path)); }, py::arg("path"));
  m.def("write_png", [](const std::string& path, const Array& a) { write_png(path, to_image(a)); },
        py::arg("path"), py::arg("image"));

  m.def("psnr", [](const Array& a, const Array& b) { return metrics::psnr(to_image(a), to_image(b)); });
  m.def("ssim", [](const Array& a, const Array& b) { return metrics::ssim(to_image(a), to_image(b)); });

  m.def(
      "canny_edges",
      [](const Array& a, double low, double high) {
        metrics::CannyOptions o;
        o.low = low;
        o.high = high;
        return to_mask(metrics::canny_edges(to_image(a), o));
      },
      py::arg("image"), py::arg("low") = 0.1, py::arg("high") = 0.2);

  m.def(
      "text_mask",
      [](const std::string& annotations_json, int width, int height) {
        const auto anns = nlohmann::json::parse(annotations_json).get<std::vector<TextLineAnnotation>>();
        return to_mask(metrics::rasterize_text_mask(anns, width, height).pixels);
      },
      py::arg("annotations_json"), py::arg("width"), py::arg("height"));

  m.def(
      "masked_edge_loss",
      [](const Array& sr, const Array& hr, const Mask& mask) {
        return metrics::masked_edge_loss(to_image(sr), to_image(hr), to_map(mask));
      },
      py::arg("sr"), py::arg("hr"), py::arg("mask"));

  m.def("normalize_transcript", &metrics::normalize_transcript);

  m.def(
      "sample_recipe",
      [](std::uint64_t seed, int scale) {
        auto r = degradation::sample_recipe(seed);
        r.scale_factor = scale;
        return degradation::serialize_recipe(r);
      },
      py::arg("seed"), py::arg("scale") = 4);

  m.def(
      "degrade",
      [](const Array& hr, const std::string& recipe, int jobs) {
        const auto r = degradation::parse_recipe(recipe);
        const Image img = to_image(hr);
        Image lr;
        {
          py::gil_scoped_release release;
          lr = degradation::degrade(img, r, jobs);
        }
        return to_array(lr);
      },
      py::arg("hr"), py::arg("recipe"), py::arg("jobs") = 1);

  m.def("config_hash", [](const std::string& config_json) {
    return config_hash(config_from_json(nlohmann::json::parse(config_json)));
  });

  m.def(
      "build_dataset",
      [](const std::string& config_path, int jobs) {
        auto cfg = load_config(config_path);
        if (jobs > 0) cfg.jobs = jobs;
        validate(cfg);
        dataset::PipelineResult r;
        {
          py::gil_scoped_release release;
          r = dataset::run_pipeline(cfg);
        }
        py::dict out;
        out["manifest_path"] = r.manifest_path;
        out["new_items"] = r.new_items;
        out["reused_items"] = r.reused_items;
        out["crops"] = r.manifest.counts.crops;
        out["auto_pass"] = r.manifest.counts.auto_pass;
        out["warnings"] = r.warnings;
        return out;
      },
      py::arg("config_path"), py::arg("jobs") = 0);

  m.def("manifest_stats", [](const std::string& path) {
    return json_to_py(dataset::to_json(dataset::dataset_statistics(dataset::load_manifest(path))));
  });

  m.def("selftest", [] {
    py::list out;
    for (const auto& r : selftest::run_all()) {
      py::dict d;
      d["name"] = r.name;
      d["passed"] = r.passed;
      d["detail"] = r.detail;
      d["seconds"] = r.seconds;
      out.append(d);
    }
    return out;
  });
}
