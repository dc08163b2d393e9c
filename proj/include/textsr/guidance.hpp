#pragma once

#include <cstdint>
#include <functional>
#include <string_view>

#include "textsr/attention.hpp"
#include "textsr/feature_extractor.hpp"
#include "textsr/image.hpp"
#include "textsr/tensor.hpp"

namespace textsr::guidance {

// The literal concept token whose embedding anchors abstract perception.
inline constexpr std::string_view kConceptToken = "TEXTS";

// Text encoder interface: token string -> [n_tok x d_text].
class TextConceptProvider {
 public:
  virtual ~TextConceptProvider() = default;
  virtual Tensor encode(std::string_view token) const = 0;
};

// Text-detector interface: LR image [H x W x 3] -> [H/8 x W/8 x c_tdm].
class TextDetectorFeatureProvider {
 public:
  virtual ~TextDetectorFeatureProvider() = default;
  virtual Tensor features(const Image& lr_image) const = 0;
};

// Stand-in text encoder: each code point of the token yields one row of a
// seeded Gaussian embedding keyed on (token, position). Not a CLIP model.
class HashTextConceptProvider final : public TextConceptProvider {
 public:
  HashTextConceptProvider(std::size_t dim, std::uint64_t seed)
      : dim_(dim), seed_(seed) {}
  Tensor encode(std::string_view token) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Stand-in text detector: Sobel gradient magnitude on a 4-level average
// pyramid, pooled (mean and max) into each 8x8 latent cell. 8 channels.
class SobelPyramidDetector final : public TextDetectorFeatureProvider {
 public:
  static constexpr std::size_t kLevels = 4;
  static constexpr std::size_t kChannels = 2 * kLevels;
  Tensor features(const Image& lr_image) const override;
};

struct GuidanceConfig {
  std::size_t channels = 64;           // c: primary feature width
  std::size_t attention_dim = 32;      // d: projected query/key width
  std::size_t text_dim = 64;           // d_text
  std::size_t detector_channels = SobelPyramidDetector::kChannels;  // c_tdm
  std::size_t abstract_dim = 0;        // c'; 0 means "same as channels"
  std::size_t texts_dim = 0;           // c''; 0 means "same as channels"
  std::uint64_t seed = 20240601;

  std::size_t resolved_abstract_dim() const {
    return abstract_dim ? abstract_dim : channels;
  }
  std::size_t resolved_texts_dim() const {
    return texts_dim ? texts_dim : channels;
  }
  void validate() const;
};

struct GuidanceParams {
  FeatureExtractorParams extractor;
  LinearProjection query_visual;
  LinearProjection key_concept;
  LinearProjection value_concept;
  LinearProjection query_abstract;
  LinearProjection key_detector;
  LinearProjection value_detector;

  AttentionProjections abstract_stage() const {
    return {query_visual, key_concept, value_concept};
  }
  AttentionProjections concrete_stage() const {
    return {query_abstract, key_detector, value_detector};
  }

  static GuidanceParams init(const GuidanceConfig& config);
};

struct GuidanceProviders {
  const TextConceptProvider& text_concept;
  const TextDetectorFeatureProvider& detector;
};

struct PerceptionResult {
  Tensor features;     // [h x w x d_v]
  Tensor kv_source;    // flattened key/value rows that were attended over
  AttentionResult attention;
};

Tensor extract_primary_features(const Image& lr_image,
                                const GuidanceParams& params);

PerceptionResult abstract_perception(const Tensor& primary,
                                     const TextConceptProvider& provider,
                                     const GuidanceParams& params);

PerceptionResult concrete_perception(const Tensor& abstract_features,
                                     const TextDetectorFeatureProvider& provider,
                                     const Image& lr_image,
                                     const GuidanceParams& params);

// Which perception stages run; the bypassed ones pass features through.
enum class GuidanceVariant : std::uint8_t {
  kFull,
  kWithoutDetector,
  kWithoutConcept,
  kWithoutBoth,
};

struct GuidanceTrace {
  Tensor primary;      // F_lr
  Tensor abstract;     // F_abs (== primary when the concept stage is bypassed)
  Tensor texts;        // F_TEXTS
};

GuidanceTrace texts_guidance(const Image& lr_image,
                             const GuidanceProviders& providers,
                             const GuidanceParams& params,
                             GuidanceVariant variant = GuidanceVariant::kFull);

// Gradients of a scalar loss w.r.t. the six projection matrices, given the
// loss gradient w.r.t. F_TEXTS (flattened [h*w x c'']).
struct ProjectionGradients {
  Tensor query_visual;
  Tensor key_concept;
  Tensor value_concept;
  Tensor query_abstract;
  Tensor key_detector;
  Tensor value_detector;
};

// Stage inputs for the two attention stages, flattened to rows.
struct PerceptionInputs {
  Tensor primary_rows;   // [n x c]
  Tensor concept_rows;   // [n_tok x d_text]
  Tensor detector_rows;  // [n x c_tdm]
};

// F_TEXTS rows computed from flattened inputs (no image or providers).
Tensor perception_forward(const PerceptionInputs& in,
                          const GuidanceParams& params);

ProjectionGradients perception_backward(const PerceptionInputs& in,
                                        const GuidanceParams& params,
                                        const Tensor& grad_texts);

// ---- one-step pipeline -------------------------------------------------

struct OneStepStubs {
  std::function<Tensor(const Image&)> encoder;           // -> F_v [h x w x c_v]
  std::function<Tensor(const Image&)> prompt_extractor;  // -> F_p (opaque)
  std::function<Tensor(const Tensor& texts, const Tensor& prompt,
                       const Tensor& latent)>
      denoiser;                                          // -> refined F_v
  std::function<Image(const Tensor&)> decoder;           // latent -> image
};

// encoder = 8x8 average pooling, prompt = mean colour [1 x 3],
// denoiser = pass-through of F_v, decoder = 8x nearest upsampling.
OneStepStubs identity_stubs();

// F_v + gain * (F_TEXTS * P) with a seeded [c'' x c_v] matrix P, so that
// the text-aware features reach the output.
std::function<Tensor(const Tensor&, const Tensor&, const Tensor&)>
conditioned_denoiser(std::size_t texts_dim, std::size_t latent_channels,
                     double gain, std::uint64_t seed);

struct OneStepResult {
  Image sr;
  Tensor latent;   // F_v
  Tensor prompt;   // F_p
  Tensor texts;    // F_TEXTS
  Tensor refined;  // denoiser output
};

// Runs encoder, prompt extractor and guidance, invokes the denoiser exactly
// once, and decodes.
OneStepResult one_step_pipeline(const Image& lr_image, const OneStepStubs& stubs,
                                const GuidanceProviders& providers,
                                const GuidanceParams& params);

}  // namespace textsr::guidance
