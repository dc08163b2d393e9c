#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "textsr/blur.hpp"
#include "textsr/error.hpp"
#include "textsr/noise.hpp"
#include "textsr/quality_metrics.hpp"
#include "textsr/recipe.hpp"
#include "textsr/resample.hpp"
#include "textsr/rng.hpp"

using namespace textsr;
using namespace textsr::degradation;

namespace {

double kernel_sum(const BlurKernel& k) {
  double s = 0;
  for (double w : k.weights) s += w;
  return s;
}

Image random_image(int h, int w, int c, std::uint64_t seed) {
  Image img(h, w, c);
  Rng rng(seed);
  for (auto& v : img.pixels) v = rng.uniform();
  return img;
}

Image text_hr(int side, std::uint64_t seed) {
  fixtures::SceneSpec s;
  s.width = s.height = side;
  s.seed = seed;
  s.noise = 3.0;
  s.lines.push_back({fixtures::axis_quad(side * 0.1, side * 0.4, side * 0.8, side * 0.15),
                     "Coffee Shop", Language::kEn, ""});
  return fixtures::render_scene(s);
}

double max_abs_diff(const Image& a, const Image& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.pixels[i] - b.pixels[i]));
  return m;
}

}  // namespace

TEST_SUITE("degradation") {

TEST_CASE("near-delta Gaussian") {
  KernelSpec k;
  k.size = 7;
  k.sigma_x = k.sigma_y = 0.1;
  const auto kern = build_blur_kernel(k);
  CHECK(kern.at(3, 3) > 0.99);
}

TEST_CASE("kernels normalize for every family and size") {
  for (int size = kMinKernelSize; size <= kMaxKernelSize; size += 2) {
    KernelSpec iso{KernelType::kIsotropic, size, 1.7, 1.7, 0.0, 0.0};
    KernelSpec aniso{KernelType::kAnisotropic, size, 2.5, 0.4, 0.7, 0.0};
    KernelSpec sinc{KernelType::kSinc, size, 0, 0, 0, 1.1};
    for (const auto& spec : {iso, aniso, sinc}) CHECK(std::fabs(kernel_sum(build_blur_kernel(spec)) - 1.0) <= 1e-9);
  }
}

TEST_CASE("anisotropic second moments follow the sigmas") {
  KernelSpec k{KernelType::kAnisotropic, 21, 3.0, 1.0, 0.0, 0.0};
  const auto kern = build_blur_kernel(k);
  double mx = 0, my = 0;
  const int r = kern.size / 2;
  for (int i = 0; i < kern.size; ++i)
    for (int j = 0; j < kern.size; ++j) {
      mx += kern.at(i, j) * (j - r) * (j - r);
      my += kern.at(i, j) * (i - r) * (i - r);
    }
  CHECK(mx > 4.0 * my);
  // rotating by 90 degrees swaps the moments
  k.theta = M_PI / 2;
  const auto rot = build_blur_kernel(k);
  double rx = 0;
  for (int i = 0; i < rot.size; ++i)
    for (int j = 0; j < rot.size; ++j) rx += rot.at(i, j) * (j - r) * (j - r);
  CHECK(std::fabs(rx - my) < 1e-9);
}

TEST_CASE("kernel parameter errors") {
  CHECK_THROWS_AS(build_blur_kernel({KernelType::kIsotropic, 8, 1, 1, 0, 0}), ParameterError);
  CHECK_THROWS_AS(build_blur_kernel({KernelType::kIsotropic, 5, 1, 1, 0, 0}), ParameterError);
  CHECK_THROWS_AS(build_blur_kernel({KernelType::kIsotropic, 23, 1, 1, 0, 0}), ParameterError);
  CHECK_THROWS_AS(build_blur_kernel({KernelType::kIsotropic, 7, 0, 0, 0, 0}), ParameterError);
  CHECK_THROWS_AS(build_blur_kernel({KernelType::kAnisotropic, 7, 1, -1, 0, 0}), ParameterError);
  CHECK_THROWS_AS(build_blur_kernel({KernelType::kSinc, 7, 0, 0, 0, 0}), ParameterError);
  CHECK_THROWS_AS(build_blur_kernel({KernelType::kSinc, 7, 0, 0, 0, 3.5}), ParameterError);
}

TEST_CASE("delta kernel is the identity; constants are preserved") {
  const Image img = random_image(20, 17, 3, 1);
  CHECK(apply_blur(img, delta_kernel(7)) == img);
  const Image flat(16, 16, 3, 0.37);
  const Image out = apply_blur(flat, build_blur_kernel({KernelType::kSinc, 9, 0, 0, 0, 0.8}));
  for (double v : out.pixels) CHECK(std::fabs(v - 0.37) <= 1e-9);
}

TEST_CASE("box kernel on a 5x5 ramp matches hand convolution") {
  Image ramp(5, 5, 1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) ramp.at(y, x, 0) = y * 5 + x;
  BlurKernel box{3, std::vector<double>(9, 1.0 / 9.0)};
  const Image out = apply_blur(ramp, box);
  // interior: the 3x3 mean of a linear ramp is the centre value
  CHECK(std::fabs(out.at(2, 2, 0) - 12.0) < 1e-12);
  // corner (0,0) with reflect-101: rows {1,0,1}, cols {1,0,1}
  // values: row1 -> 6,5,6 ; row0 -> 1,0,1 ; row1 -> 6,5,6 => sum 36
  CHECK(std::fabs(out.at(0, 0, 0) - 4.0) < 1e-12);
  // edge (0,2): rows {1,0,1}, cols {1,2,3}: 6+7+8 + 1+2+3 + 6+7+8 = 48
  CHECK(std::fabs(out.at(0, 2, 0) - 48.0 / 9.0) < 1e-12);
  CHECK(max_abs_diff(out, oracle::direct_filter(ramp, box)) < 1e-12);
}

TEST_CASE("apply_blur matches the nested-loop oracle on small fixtures") {
  Rng rng(3);
  for (int t = 0; t < 12; ++t) {
    const int h = static_cast<int>(rng.uniform_int(12, 32)), w = static_cast<int>(rng.uniform_int(12, 32));
    const Image img = random_image(h, w, 3, 50 + t);
    const int size = 2 * static_cast<int>(rng.uniform_int(3, 5)) + 1;
    KernelSpec k{KernelType::kAnisotropic, size, rng.uniform(0.3, 3), rng.uniform(0.3, 3),
                 rng.uniform(-3, 3), 0.0};
    const auto kern = build_blur_kernel(k);
    CHECK(max_abs_diff(apply_blur(img, kern), oracle::direct_filter(img, kern)) <= 1e-9);
    CHECK(apply_blur(img, kern, 4) == apply_blur(img, kern, 1));
  }
}

TEST_CASE("kernel larger than the image is rejected") {
  CHECK_THROWS_AS(apply_blur(Image(6, 30, 1), delta_kernel(13)), ParameterError);
}

TEST_CASE("resize examples") {
  const Image img = random_image(9, 13, 3, 4);
  for (auto mode : {ResizeMode::kArea, ResizeMode::kBilinear, ResizeMode::kBicubic})
    CHECK(resize(img, mode, 1.0) == img);

  Image checker(2, 2, 1);
  checker.at(0, 0, 0) = 1;
  checker.at(1, 1, 0) = 1;
  const Image one = resize(checker, ResizeMode::kArea, 0.5);
  CHECK(one.height == 1);
  CHECK(std::fabs(one.at(0, 0, 0) - 0.5) < 1e-15);

  Image pair(1, 2, 1);
  pair.at(0, 1, 0) = 1.0;
  const Image up = resize(pair, ResizeMode::kBilinear, 2.0);
  REQUIRE(up.width == 4);
  const double expect[4] = {0.0, 0.25, 0.75, 1.0};
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 4; ++x) CHECK(std::fabs(up.at(y, x, 0) - expect[x]) < 1e-15);

  CHECK_THROWS_AS(resize(pair, ResizeMode::kArea, 0.1), ParameterError);
  CHECK_THROWS_AS(resize(pair, ResizeMode::kArea, -1.0), ParameterError);
}

TEST_CASE("area downscale preserves the mean") {
  const Image img = random_image(30, 45, 1, 5);
  const Image small = resize_to(img, ResizeMode::kArea, 7, 11);
  double a = 0, b = 0;
  for (double v : img.pixels) a += v / img.size();
  for (double v : small.pixels) b += v / small.size();
  CHECK(std::fabs(a - b) < 1e-12);
}

TEST_CASE("Gaussian noise std within 2% over 1e6 pixels") {
  const Image gray(1000, 1000, 1, 0.5);
  NoiseSpec spec{NoiseFamily::kGaussian, 1.0 / 255.0, false, 99};
  const Image noisy = add_noise(gray, spec);
  double mean = 0, var = 0;
  for (std::size_t i = 0; i < noisy.size(); ++i) mean += noisy.pixels[i] - 0.5;
  mean /= noisy.size();
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    const double d = noisy.pixels[i] - 0.5 - mean;
    var += d * d;
  }
  const double sd = std::sqrt(var / (noisy.size() - 1));
  CHECK(std::fabs(sd / (1.0 / 255.0) - 1.0) < 0.02);
}

TEST_CASE("noise determinism, gray flag, range errors") {
  const Image img = random_image(16, 16, 3, 6);
  NoiseSpec spec{NoiseFamily::kGaussian, 10.0 / 255.0, false, 5};
  CHECK(add_noise(img, spec) == add_noise(img, spec));
  spec.gray = true;
  const Image mid(16, 16, 3, 0.5);
  const Image g = add_noise(mid, spec);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      CHECK(g.at(y, x, 0) == g.at(y, x, 1));
      CHECK(g.at(y, x, 1) == g.at(y, x, 2));
    }
  NoiseSpec poisson{NoiseFamily::kPoisson, 1.0, true, 8};
  const Image p = add_noise(mid, poisson);
  for (double v : p.pixels) CHECK((v >= 0.0 && v <= 1.0));
  CHECK_THROWS_AS(add_noise(img, {NoiseFamily::kGaussian, 0.0, false, 1}), ParameterError);
  CHECK_THROWS_AS(add_noise(img, {NoiseFamily::kGaussian, 31.0 / 255.0, false, 1}), ParameterError);
  CHECK_THROWS_AS(add_noise(img, {NoiseFamily::kPoisson, 0.01, false, 1}), ParameterError);
}

TEST_CASE("jpeg round trip") {
  Image grad(64, 64, 3);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 3; ++c) grad.at(y, x, c) = (x + y + 10 * c) / 160.0;
  const Image q95 = jpeg_roundtrip(grad, 95);
  CHECK(q95.height == 64);
  CHECK(q95.width == 64);
  CHECK(metrics::psnr(q95, grad) > 35.0);
  const Image textured = text_hr(64, 3);
  CHECK(metrics::psnr(jpeg_roundtrip(textured, 30), textured) <=
        metrics::psnr(jpeg_roundtrip(textured, 95), textured));
  CHECK_THROWS_AS(jpeg_roundtrip(grad, 29), ParameterError);
  CHECK_THROWS_AS(jpeg_roundtrip(grad, 96), ParameterError);
}

TEST_CASE("sampled recipes: determinism, distinctness, validity, round trip") {
  CHECK(sample_recipe(42) == sample_recipe(42));
  std::set<std::string> seen;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto r = sample_recipe(s);
    CHECK_NOTHROW(validate(r));
    const std::string line = serialize_recipe(r);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(parse_recipe(line) == r);
    seen.insert(line);
    for (const auto& st : r.stages)
      if (const auto* b = std::get_if<BlurStage>(&st))
        CHECK(std::fabs(kernel_sum(build_blur_kernel(b->kernel)) - 1.0) <= 1e-9);
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("recipe stage order is second-order") {
  const auto r = sample_recipe(1234);
  std::vector<std::string> kinds;
  for (const auto& st : r.stages) kinds.emplace_back(stage_kind(st));
  // Each order ends with noise then jpeg; the chain ends with a resize.
  int jpegs = 0;
  for (const auto& k : kinds) jpegs += k == "jpeg";
  CHECK(jpegs == 2);
  CHECK(kinds.back() == "resize");
}

TEST_CASE("degrade 512 -> 128, replay and thread independence") {
  const Image hr = text_hr(512, 9);
  const auto recipe = sample_recipe(77);
  const Image lr = degrade(hr, recipe, 1);
  CHECK(lr.height == 128);
  CHECK(lr.width == 128);
  for (double v : lr.pixels) CHECK((v >= 0.0 && v <= 1.0));
  CHECK(degrade(hr, recipe, 1) == lr);
  CHECK(degrade(hr, recipe, 4) == lr);
  CHECK(encode_png(degrade(hr, recipe, 8)) == encode_png(lr));
}

TEST_CASE("identity-leaning recipe approximates a plain downscale") {
  const Image hr = text_hr(256, 10);
  DegradationRecipe r;
  r.seed = 1;
  r.stages.emplace_back(BlurStage{{KernelType::kIsotropic, 7, 0.1, 0.1, 0.0, 0.0}});
  r.stages.emplace_back(ResizeStage{ResizeMode::kArea, 1.0, ResizeReference::kTarget});
  r.stages.emplace_back(JpegStage{95});
  const Image lr = degrade(hr, r);
  CHECK(metrics::psnr(lr, resize_to(hr, ResizeMode::kArea, 64, 64)) > 30.0);
}

TEST_CASE("degrade rejects indivisible sizes") {
  CHECK_THROWS_AS(degrade(Image(510, 512, 3), sample_recipe(1)), ParameterError);
}

TEST_CASE("corpus mode uses per-image seeds and is thread-independent") {
  std::vector<Image> imgs;
  std::vector<DegradationRecipe> recipes;
  for (int i = 0; i < 6; ++i) {
    imgs.push_back(text_hr(64, 20 + i));
    recipes.push_back(sample_recipe(corpus_image_seed(1000, i)));
  }
  CHECK(corpus_image_seed(1000, 3) == (1000u ^ 3u));
  const auto a = degrade_corpus(imgs, recipes, 1);
  const auto b = degrade_corpus(imgs, recipes, 4);
  CHECK(a == b);
  CHECK(a[2] == degrade(imgs[2], recipes[2]));
}

TEST_CASE("validate rejects out-of-range stages") {
  DegradationRecipe r;
  r.stages.emplace_back(JpegStage{20});
  CHECK_THROWS_AS(validate(r), ParameterError);
  r.stages = {BlurStage{{KernelType::kIsotropic, 9, 5.0, 5.0, 0, 0}}};
  CHECK_THROWS_AS(validate(r), ParameterError);
  r.stages = {ResizeStage{ResizeMode::kBicubic, 3.0, ResizeReference::kCurrent}};
  CHECK_THROWS_AS(validate(r), ParameterError);
}

TEST_CASE("ranges file matches the built-in defaults") {
  std::ifstream in(std::string(TEXTSR_SOURCE_DIR) + "/config/degradation_v1.json");
  REQUIRE(in);
  const DegradationRanges from_file = nlohmann::json::parse(in).get<DegradationRanges>();
  CHECK(nlohmann::json(from_file) == nlohmann::json(DegradationRanges::defaults()));
}

}  // TEST_SUITE
