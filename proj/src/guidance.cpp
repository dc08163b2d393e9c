#include "textsr/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "textsr/error.hpp"
#include "textsr/filters.hpp"
#include "textsr/rng.hpp"

namespace textsr::guidance {
namespace {

std::size_t count_code_points(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

Tensor flatten_grid(const Tensor& grid) {
  return grid.reshaped({grid.dim(0) * grid.dim(1), grid.dim(2)});
}

Tensor unflatten_grid(const Tensor& rows, std::size_t h, std::size_t w) {
  return rows.reshaped({h, w, rows.dim(1)});
}

void require_grid(const Tensor& t, const char* what) {
  if (t.rank() != 3) {
    throw ShapeError(std::string(what) + " must be [h x w x c], got " +
                     to_string(t.shape()));
  }
}

std::string grid_string(std::size_t h, std::size_t w) {
  return std::to_string(h) + "x" + std::to_string(w);
}

}  // namespace

Tensor HashTextConceptProvider::encode(std::string_view token) const {
  const std::size_t rows = count_code_points(token);
  if (rows == 0 || dim_ == 0) {
    throw ProviderError("text concept provider cannot encode token '" +
                        std::string(token) + "'");
  }
  Tensor out({rows, dim_});
  const std::uint64_t key = fnv1a(token, fnv1a("concept") ^ seed_);
  const double s = 1.0 / std::sqrt(static_cast<double>(dim_));
  for (std::size_t r = 0; r < rows; ++r) {
    Rng rng(mix_seed(key, r));
    for (std::size_t c = 0; c < dim_; ++c) out.at(r, c) = s * rng.normal();
  }
  return out;
}

Tensor SobelPyramidDetector::features(const Image& lr_image) const {
  if (lr_image.height % 8 || lr_image.width % 8 || lr_image.empty()) {
    throw ShapeError("detector input " + grid_string(lr_image.height, lr_image.width) +
                     " is not divisible by 8");
  }
  const auto h = static_cast<std::size_t>(lr_image.height / 8);
  const auto w = static_cast<std::size_t>(lr_image.width / 8);
  Tensor out({h, w, kChannels});
  Image level = to_gray(lr_image);
  for (std::size_t l = 0; l < kLevels; ++l) {
    if (l > 0) level = average_pool2(level);
    const Image mag = sobel(level).magnitude;
    const std::size_t cell = 8u >> l;
    for (std::size_t gy = 0; gy < h; ++gy) {
      for (std::size_t gx = 0; gx < w; ++gx) {
        double total = 0.0, peak = 0.0;
        for (std::size_t y = gy * cell; y < (gy + 1) * cell; ++y) {
          for (std::size_t x = gx * cell; x < (gx + 1) * cell; ++x) {
            const double v = mag.at(static_cast<int>(y), static_cast<int>(x), 0);
            total += v;
            peak = std::max(peak, v);
          }
        }
        out.at(gy, gx, 2 * l) = total / static_cast<double>(cell * cell);
        out.at(gy, gx, 2 * l + 1) = peak;
      }
    }
  }
  return out;
}

void GuidanceConfig::validate() const {
  if (!channels || !attention_dim || !text_dim || !detector_channels) {
    throw ParameterError("guidance dimensions must be positive");
  }
}

GuidanceParams GuidanceParams::init(const GuidanceConfig& config) {
  config.validate();
  const std::size_t c = config.channels, d = config.attention_dim;
  const std::size_t c_abs = config.resolved_abstract_dim();
  const std::size_t c_texts = config.resolved_texts_dim();
  const std::uint64_t s = config.seed;
  using R = ProjectionRole;
  return GuidanceParams{
      FeatureExtractorParams::random(c, mix_seed(s, 100)),
      LinearProjection::random(R::kQueryVisual, c, d, s),
      LinearProjection::random(R::kKeyConcept, config.text_dim, d, s),
      LinearProjection::random(R::kValueConcept, config.text_dim, c_abs, s),
      LinearProjection::random(R::kQueryAbstract, c_abs, d, s),
      LinearProjection::random(R::kKeyDetector, config.detector_channels, d, s),
      LinearProjection::random(R::kValueDetector, config.detector_channels,
                               c_texts, s),
  };
}

Tensor extract_primary_features(const Image& lr_image,
                                const GuidanceParams& params) {
  return conv_residual_forward(to_tensor(lr_image), params.extractor);
}

PerceptionResult abstract_perception(const Tensor& primary,
                                     const TextConceptProvider& provider,
                                     const GuidanceParams& params) {
  require_grid(primary, "primary features");
  Tensor concept_rows;
  try {
    concept_rows = provider.encode(kConceptToken);
  } catch (const Error& e) {
    throw ProviderError("text concept provider failed for token '" +
                        std::string(kConceptToken) + "': " + e.what());
  }
  if (concept_rows.rank() != 2 || concept_rows.empty()) {
    throw ProviderError("text concept provider returned no rows for token '" +
                        std::string(kConceptToken) + "'");
  }
  PerceptionResult r;
  r.attention = cross_attention(flatten_grid(primary), concept_rows,
                                params.abstract_stage());
  r.features = unflatten_grid(r.attention.output, primary.dim(0), primary.dim(1));
  r.kv_source = std::move(concept_rows);
  return r;
}

PerceptionResult concrete_perception(const Tensor& abstract_features,
                                     const TextDetectorFeatureProvider& provider,
                                     const Image& lr_image,
                                     const GuidanceParams& params) {
  require_grid(abstract_features, "abstract features");
  Tensor detector = provider.features(lr_image);
  require_grid(detector, "detector features");
  const std::size_t h = abstract_features.dim(0), w = abstract_features.dim(1);
  if (detector.dim(0) != h || detector.dim(1) != w) {
    throw ShapeError("detector grid " + grid_string(detector.dim(0), detector.dim(1)) +
                     " does not match latent grid " + grid_string(h, w));
  }
  PerceptionResult r;
  r.kv_source = flatten_grid(detector);
  r.attention = cross_attention(flatten_grid(abstract_features), r.kv_source,
                                params.concrete_stage());
  r.features = unflatten_grid(r.attention.output, h, w);
  return r;
}

GuidanceTrace texts_guidance(const Image& lr_image,
                             const GuidanceProviders& providers,
                             const GuidanceParams& params,
                             GuidanceVariant variant) {
  GuidanceTrace t;
  t.primary = extract_primary_features(lr_image, params);
  const bool use_concept = variant == GuidanceVariant::kFull ||
                           variant == GuidanceVariant::kWithoutDetector;
  const bool use_detector = variant == GuidanceVariant::kFull ||
                            variant == GuidanceVariant::kWithoutConcept;
  t.abstract = use_concept
                   ? abstract_perception(t.primary, providers.text_concept, params).features
                   : t.primary;
  t.texts = use_detector ? concrete_perception(t.abstract, providers.detector,
                                               lr_image, params)
                               .features
                         : t.abstract;
  return t;
}

Tensor perception_forward(const PerceptionInputs& in,
                          const GuidanceParams& params) {
  const auto first =
      cross_attention(in.primary_rows, in.concept_rows, params.abstract_stage());
  return cross_attention(first.output, in.detector_rows, params.concrete_stage())
      .output;
}

ProjectionGradients perception_backward(const PerceptionInputs& in,
                                        const GuidanceParams& params,
                                        const Tensor& grad_texts) {
  const auto first =
      cross_attention(in.primary_rows, in.concept_rows, params.abstract_stage());
  const auto second =
      cross_attention(first.output, in.detector_rows, params.concrete_stage());
  const auto g2 = cross_attention_backward(first.output, in.detector_rows,
                                           params.concrete_stage(), second,
                                           grad_texts);
  const auto g1 = cross_attention_backward(in.primary_rows, in.concept_rows,
                                           params.abstract_stage(), first,
                                           g2.query_src);
  return {g1.query_weight, g1.key_weight, g1.value_weight,
          g2.query_weight, g2.key_weight, g2.value_weight};
}

OneStepStubs identity_stubs() {
  OneStepStubs s;
  s.encoder = [](const Image& img) {
    const std::size_t h = img.height / 8, w = img.width / 8, c = img.channels;
    Tensor out({h, w, c});
    for (std::size_t y = 0; y < h * 8; ++y)
      for (std::size_t x = 0; x < w * 8; ++x)
        for (std::size_t k = 0; k < c; ++k)
          out.at(y / 8, x / 8, k) +=
              img.at(static_cast<int>(y), static_cast<int>(x), static_cast<int>(k)) / 64.0;
    return out;
  };
  s.prompt_extractor = [](const Image& img) {
    Tensor out({1, static_cast<std::size_t>(img.channels)});
    const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
    for (std::size_t p = 0; p < n; ++p)
      for (int k = 0; k < img.channels; ++k)
        out.at(0, k) += img.pixels[p * img.channels + k] / static_cast<double>(n);
    return out;
  };
  s.denoiser = [](const Tensor&, const Tensor&, const Tensor& latent) {
    return latent;
  };
  s.decoder = [](const Tensor& latent) {
    const std::size_t h = latent.dim(0) * 8, w = latent.dim(1) * 8, c = latent.dim(2);
    Image out(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        for (std::size_t k = 0; k < c; ++k)
          out.at(static_cast<int>(y), static_cast<int>(x), static_cast<int>(k)) =
              latent.at(y / 8, x / 8, k);
    return out;
  };
  return s;
}

std::function<Tensor(const Tensor&, const Tensor&, const Tensor&)>
conditioned_denoiser(std::size_t texts_dim, std::size_t latent_channels,
                     double gain, std::uint64_t seed) {
  Tensor mix({texts_dim, latent_channels});
  Rng rng(seed);
  for (auto& v : mix.values()) v = rng.normal() / std::sqrt(static_cast<double>(texts_dim));
  return [mix = std::move(mix), gain](const Tensor& texts, const Tensor&,
                                      const Tensor& latent) {
    if (texts.rank() != 3 || latent.rank() != 3 || texts.dim(0) != latent.dim(0) ||
        texts.dim(1) != latent.dim(1)) {
      throw ShapeError("conditioned denoiser: F_TEXTS grid " + to_string(texts.shape()) +
                       " does not match latent " + to_string(latent.shape()));
    }
    const Tensor injected = matmul(flatten_grid(texts), mix)
                                .reshaped(latent.shape());
    return add(latent, scale(injected, gain));
  };
}

OneStepResult one_step_pipeline(const Image& lr_image, const OneStepStubs& stubs,
                                const GuidanceProviders& providers,
                                const GuidanceParams& params) {
  if (!stubs.encoder || !stubs.prompt_extractor || !stubs.denoiser || !stubs.decoder) {
    throw ParameterError("one-step pipeline needs all four stubs");
  }
  OneStepResult r;
  r.latent = stubs.encoder(lr_image);
  if (r.latent.rank() != 3 ||
      r.latent.dim(0) * 8 != static_cast<std::size_t>(lr_image.height) ||
      r.latent.dim(1) * 8 != static_cast<std::size_t>(lr_image.width)) {
    throw ShapeError("encoder stub returned " + to_string(r.latent.shape()) +
                     " for a " + grid_string(lr_image.height, lr_image.width) +
                     " image; expected an H/8 x W/8 latent grid");
  }
  r.prompt = stubs.prompt_extractor(lr_image);
  r.texts = texts_guidance(lr_image, providers, params).texts;

  r.refined = stubs.denoiser(r.texts, r.prompt, r.latent);
  if (r.refined.shape() != r.latent.shape()) {
    throw ShapeError("denoiser stub returned " + to_string(r.refined.shape()) +
                     ", expected latent shape " + to_string(r.latent.shape()));
  }
  r.sr = stubs.decoder(r.refined);
  if (static_cast<std::size_t>(r.sr.height) != r.latent.dim(0) * 8 ||
      static_cast<std::size_t>(r.sr.width) != r.latent.dim(1) * 8) {
    throw ShapeError("decoder stub returned a " + grid_string(r.sr.height, r.sr.width) +
                     " image, expected 8x the latent grid");
  }
  return r;
}

}  // namespace textsr::guidance
