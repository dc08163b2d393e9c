#include "textsr/recipe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "textsr/error.hpp"
#include "textsr/parallel.hpp"
#include "textsr/rng.hpp"

namespace textsr::degradation {
namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

int sample_kernel_size(Rng& rng, const DegradationRanges& ranges) {
  const int choices = (ranges.kernel_max - ranges.kernel_min) / 2;
  return ranges.kernel_min + 2 * static_cast<int>(rng.uniform_int(0, choices));
}

KernelSpec sample_gaussian_or_sinc(Rng& rng, const DegradationRanges& ranges,
                                   const OrderRanges& order) {
  KernelSpec k;
  k.size = sample_kernel_size(rng, ranges);
  if (rng.bernoulli(order.sinc_prob)) {
    k.type = KernelType::kSinc;
    k.sigma_x = k.sigma_y = 0.0;
    k.cutoff = k.size < 13 ? rng.uniform(kPi / 3.0, kPi)
                           : rng.uniform(kPi / 5.0, kPi);
    return k;
  }
  if (rng.bernoulli(order.iso_prob)) {
    k.type = KernelType::kIsotropic;
    k.sigma_x = k.sigma_y = rng.uniform(order.sigma_min, order.sigma_max);
  } else {
    k.type = KernelType::kAnisotropic;
    k.sigma_x = rng.uniform(order.sigma_min, order.sigma_max);
    k.sigma_y = rng.uniform(order.sigma_min, order.sigma_max);
    k.theta = rng.uniform(-kPi, kPi);
  }
  return k;
}

ResizeMode sample_mode(Rng& rng) {
  return static_cast<ResizeMode>(rng.uniform_int(0, 2));
}

ResizeStage sample_resize(Rng& rng, const OrderRanges& order,
                          ResizeReference reference) {
  ResizeStage s;
  const double u = rng.uniform();
  if (u < order.resize_up_prob) {
    s.scale = rng.uniform(1.0, order.resize_max);
  } else if (u < order.resize_up_prob + order.resize_down_prob) {
    s.scale = rng.uniform(order.resize_min, 1.0);
  } else {
    s.scale = 1.0;
  }
  s.mode = sample_mode(rng);
  s.reference = reference;
  return s;
}

NoiseStage sample_noise(Rng& rng, const OrderRanges& order,
                        std::uint64_t noise_seed) {
  NoiseSpec n;
  if (rng.bernoulli(order.gaussian_noise_prob)) {
    n.family = NoiseFamily::kGaussian;
    n.strength = rng.uniform(order.noise_sigma_min, order.noise_sigma_max);
  } else {
    n.family = NoiseFamily::kPoisson;
    n.strength = rng.uniform(order.poisson_min, order.poisson_max);
  }
  n.gray = rng.bernoulli(order.gray_noise_prob);
  n.seed = noise_seed;
  return {n};
}

JpegStage sample_jpeg(Rng& rng, const OrderRanges& order) {
  return {static_cast<int>(rng.uniform_int(order.jpeg_min, order.jpeg_max))};
}

void require_in(double v, double lo, double hi, const std::string& what) {
  if (!(v >= lo && v <= hi)) {
    throw ParameterError(what + " " + std::to_string(v) + " outside [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

int side_for(const ResizeStage& s, int current, int target) {
  const int ref = s.reference == ResizeReference::kCurrent ? current : target;
  return static_cast<int>(std::lround(ref * s.scale));
}

json order_to_json(const OrderRanges& o) {
  return {{"blur_prob", o.blur_prob},
          {"sinc_prob", o.sinc_prob},
          {"iso_prob", o.iso_prob},
          {"sigma", {o.sigma_min, o.sigma_max}},
          {"resize_up_prob", o.resize_up_prob},
          {"resize_down_prob", o.resize_down_prob},
          {"resize_range", {o.resize_min, o.resize_max}},
          {"gaussian_noise_prob", o.gaussian_noise_prob},
          {"noise_sigma", {o.noise_sigma_min, o.noise_sigma_max}},
          {"poisson_scale", {o.poisson_min, o.poisson_max}},
          {"gray_noise_prob", o.gray_noise_prob},
          {"jpeg_quality", {o.jpeg_min, o.jpeg_max}}};
}

OrderRanges order_from_json(const json& j) {
  OrderRanges o;
  o.blur_prob = j.at("blur_prob").get<double>();
  o.sinc_prob = j.at("sinc_prob").get<double>();
  o.iso_prob = j.at("iso_prob").get<double>();
  o.sigma_min = j.at("sigma").at(0).get<double>();
  o.sigma_max = j.at("sigma").at(1).get<double>();
  o.resize_up_prob = j.at("resize_up_prob").get<double>();
  o.resize_down_prob = j.at("resize_down_prob").get<double>();
  o.resize_min = j.at("resize_range").at(0).get<double>();
  o.resize_max = j.at("resize_range").at(1).get<double>();
  o.gaussian_noise_prob = j.at("gaussian_noise_prob").get<double>();
  o.noise_sigma_min = j.at("noise_sigma").at(0).get<double>();
  o.noise_sigma_max = j.at("noise_sigma").at(1).get<double>();
  o.poisson_min = j.at("poisson_scale").at(0).get<double>();
  o.poisson_max = j.at("poisson_scale").at(1).get<double>();
  o.gray_noise_prob = j.at("gray_noise_prob").get<double>();
  o.jpeg_min = j.at("jpeg_quality").at(0).get<int>();
  o.jpeg_max = j.at("jpeg_quality").at(1).get<int>();
  return o;
}

}  // namespace

std::string_view stage_kind(const StageSpec& stage) {
  return std::visit(Overloaded{
                        [](const BlurStage&) { return "blur"; },
                        [](const ResizeStage&) { return "resize"; },
                        [](const NoiseStage&) { return "noise"; },
                        [](const JpegStage&) { return "jpeg"; },
                    },
                    stage);
}

DegradationRanges DegradationRanges::defaults() {
  DegradationRanges r;
  r.second.blur_prob = 0.8;
  r.second.sigma_max = 1.5;
  r.second.resize_up_prob = 0.3;
  r.second.resize_down_prob = 0.4;
  r.second.resize_min = 0.3;
  r.second.resize_max = 1.2;
  r.second.noise_sigma_max = 25.0 / 255.0;
  r.second.poisson_max = 2.5;
  return r;
}

DegradationRecipe sample_recipe(std::uint64_t seed,
                                const DegradationRanges& ranges) {
  Rng rng(mix_seed(seed));
  DegradationRecipe recipe;
  recipe.seed = seed;
  recipe.ranges_version = ranges.version;
  auto& st = recipe.stages;
  auto noise_seed = [&] { return mix_seed(seed, st.size()); };

  // First order: blur -> resize -> noise -> jpeg.
  if (rng.bernoulli(ranges.first.blur_prob))
    st.emplace_back(BlurStage{sample_gaussian_or_sinc(rng, ranges, ranges.first)});
  st.emplace_back(sample_resize(rng, ranges.first, ResizeReference::kCurrent));
  st.emplace_back(sample_noise(rng, ranges.first, noise_seed()));
  st.emplace_back(sample_jpeg(rng, ranges.first));

  // Second order, resized relative to the target size.
  if (rng.bernoulli(ranges.second.blur_prob))
    st.emplace_back(BlurStage{sample_gaussian_or_sinc(rng, ranges, ranges.second)});
  st.emplace_back(sample_resize(rng, ranges.second, ResizeReference::kTarget));
  st.emplace_back(sample_noise(rng, ranges.second, noise_seed()));
  st.emplace_back(sample_jpeg(rng, ranges.second));

  // Closing sinc filter, then resize to the exact target.
  if (rng.bernoulli(ranges.final_sinc_prob)) {
    KernelSpec k;
    k.type = KernelType::kSinc;
    k.size = sample_kernel_size(rng, ranges);
    k.sigma_x = k.sigma_y = 0.0;
    k.cutoff = rng.uniform(kPi / 3.0, kPi);
    st.emplace_back(BlurStage{k});
  }
  st.emplace_back(ResizeStage{sample_mode(rng), 1.0, ResizeReference::kTarget});
  return recipe;
}

void validate(const DegradationRecipe& recipe,
              const DegradationRanges& ranges) {
  if (recipe.scale_factor < 1) throw ParameterError("scale factor must be >= 1");
  const auto& a = ranges.first;
  const auto& b = ranges.second;
  for (const auto& stage : recipe.stages) {
    std::visit(
        Overloaded{
            [&](const BlurStage& s) {
              const auto& k = s.kernel;
              if (k.size % 2 == 0 || k.size < ranges.kernel_min ||
                  k.size > ranges.kernel_max) {
                throw ParameterError("kernel size " + std::to_string(k.size) +
                                     " must be odd and in range");
              }
              if (k.type == KernelType::kSinc) {
                if (!(k.cutoff > 0.0 && k.cutoff <= kPi))
                  throw ParameterError("sinc cutoff outside (0, pi]");
              } else {
                const double lo = std::min(a.sigma_min, b.sigma_min);
                const double hi = std::max(a.sigma_max, b.sigma_max);
                require_in(k.sigma_x, lo, hi, "blur sigma_x");
                require_in(k.sigma_y, lo, hi, "blur sigma_y");
                require_in(k.theta, -kPi, kPi, "blur rotation");
              }
            },
            [&](const ResizeStage& s) {
              require_in(s.scale, std::min(a.resize_min, b.resize_min),
                         std::max(a.resize_max, b.resize_max), "resize scale");
            },
            [&](const NoiseStage& s) { degradation::validate(s.noise); },
            [&](const JpegStage& s) {
              require_in(s.quality, std::min(a.jpeg_min, b.jpeg_min),
                         std::max(a.jpeg_max, b.jpeg_max), "jpeg quality");
            },
        },
        stage);
  }
}

Image degrade(const Image& hr, const DegradationRecipe& recipe, int jobs) {
  const int f = recipe.scale_factor;
  if (f < 1) throw ParameterError("scale factor must be >= 1");
  if (hr.height % f || hr.width % f) {
    throw ParameterError("HR size " + std::to_string(hr.width) + "x" +
                         std::to_string(hr.height) +
                         " is not divisible by scale factor " +
                         std::to_string(f));
  }
  const int target_h = hr.height / f, target_w = hr.width / f;
  Image img = hr;
  for (std::size_t i = 0; i < recipe.stages.size(); ++i) {
    const bool last = i + 1 == recipe.stages.size();
    img = std::visit(
        Overloaded{
            [&](const BlurStage& s) {
              return apply_blur(img, build_blur_kernel(s.kernel), jobs);
            },
            [&](const ResizeStage& s) {
              int h = side_for(s, img.height, target_h);
              int w = side_for(s, img.width, target_w);
              if (!last) {
                h = std::max(h, kMinWorkingSide);
                w = std::max(w, kMinWorkingSide);
              }
              return resize_to(img, s.mode, h, w, jobs);
            },
            [&](const NoiseStage& s) { return add_noise(img, s.noise); },
            [&](const JpegStage& s) { return jpeg_roundtrip(img, s.quality); },
        },
        recipe.stages[i]);
    img = clamp01(std::move(img));
  }
  if (img.height != target_h || img.width != target_w) {
    img = clamp01(resize_to(img, ResizeMode::kArea, target_h, target_w, jobs));
  }
  return img;
}

std::vector<Image> degrade_corpus(const std::vector<Image>& images,
                                  const std::vector<DegradationRecipe>& recipes,
                                  int jobs) {
  if (images.size() != recipes.size()) {
    throw ParameterError("degrade_corpus needs one recipe per image");
  }
  std::vector<Image> out(images.size());
  parallel_for(images.size(), jobs,
               [&](std::size_t i) { out[i] = degrade(images[i], recipes[i]); });
  return out;
}

void to_json(json& j, const DegradationRecipe& r) {
  json stages = json::array();
  for (const auto& stage : r.stages) {
    std::visit(
        Overloaded{
            [&](const BlurStage& s) {
              const auto& k = s.kernel;
              stages.push_back({{"kind", "blur"},
                                {"kernel", to_string(k.type)},
                                {"size", k.size},
                                {"sigma_x", k.sigma_x},
                                {"sigma_y", k.sigma_y},
                                {"theta", k.theta},
                                {"cutoff", k.cutoff}});
            },
            [&](const ResizeStage& s) {
              stages.push_back(
                  {{"kind", "resize"},
                   {"mode", to_string(s.mode)},
                   {"scale", s.scale},
                   {"reference", s.reference == ResizeReference::kCurrent
                                     ? "current"
                                     : "target"}});
            },
            [&](const NoiseStage& s) {
              stages.push_back({{"kind", "noise"},
                                {"family", to_string(s.noise.family)},
                                {"strength", s.noise.strength},
                                {"gray", s.noise.gray},
                                {"seed", s.noise.seed}});
            },
            [&](const JpegStage& s) {
              stages.push_back({{"kind", "jpeg"}, {"quality", s.quality}});
            },
        },
        stage);
  }
  j = json{{"seed", r.seed},
           {"scale_factor", r.scale_factor},
           {"ranges_version", r.ranges_version},
           {"stages", std::move(stages)}};
}

void from_json(const json& j, DegradationRecipe& r) {
  r.seed = j.at("seed").get<std::uint64_t>();
  r.scale_factor = j.at("scale_factor").get<int>();
  r.ranges_version = j.value("ranges_version", "");
  r.stages.clear();
  for (const auto& s : j.at("stages")) {
    const auto kind = s.at("kind").get<std::string>();
    if (kind == "blur") {
      KernelSpec k;
      k.type = kernel_type_from_string(s.at("kernel").get<std::string>());
      k.size = s.at("size").get<int>();
      k.sigma_x = s.at("sigma_x").get<double>();
      k.sigma_y = s.at("sigma_y").get<double>();
      k.theta = s.at("theta").get<double>();
      k.cutoff = s.at("cutoff").get<double>();
      r.stages.emplace_back(BlurStage{k});
    } else if (kind == "resize") {
      ResizeStage rs;
      rs.mode = resize_mode_from_string(s.at("mode").get<std::string>());
      rs.scale = s.at("scale").get<double>();
      const auto ref = s.at("reference").get<std::string>();
      if (ref != "current" && ref != "target")
        throw FormatError("unknown resize reference '" + ref + "'");
      rs.reference =
          ref == "current" ? ResizeReference::kCurrent : ResizeReference::kTarget;
      r.stages.emplace_back(rs);
    } else if (kind == "noise") {
      NoiseSpec n;
      n.family = noise_family_from_string(s.at("family").get<std::string>());
      n.strength = s.at("strength").get<double>();
      n.gray = s.at("gray").get<bool>();
      n.seed = s.at("seed").get<std::uint64_t>();
      r.stages.emplace_back(NoiseStage{n});
    } else if (kind == "jpeg") {
      r.stages.emplace_back(JpegStage{s.at("quality").get<int>()});
    } else {
      throw FormatError("unknown stage kind '" + kind + "'");
    }
  }
}

void to_json(json& j, const DegradationRanges& r) {
  j = json{{"version", r.version},
           {"kernel_size", {r.kernel_min, r.kernel_max}},
           {"first_order", order_to_json(r.first)},
           {"second_order", order_to_json(r.second)},
           {"final_sinc_prob", r.final_sinc_prob}};
}

void from_json(const json& j, DegradationRanges& r) {
  r.version = j.at("version").get<std::string>();
  r.kernel_min = j.at("kernel_size").at(0).get<int>();
  r.kernel_max = j.at("kernel_size").at(1).get<int>();
  r.first = order_from_json(j.at("first_order"));
  r.second = order_from_json(j.at("second_order"));
  r.final_sinc_prob = j.at("final_sinc_prob").get<double>();
}

std::string serialize_recipe(const DegradationRecipe& recipe) {
  return json(recipe).dump();
}

DegradationRecipe parse_recipe(const std::string& line) {
  try {
    return json::parse(line).get<DegradationRecipe>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed recipe: ") + e.what());
  }
}

}  // namespace textsr::degradation
