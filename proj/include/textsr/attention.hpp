#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "textsr/tensor.hpp"

namespace textsr {

// The six learnable projections of the two perception stages.
enum class ProjectionRole : std::uint8_t {
  kQueryVisual,     // queries from the primary visual features
  kKeyConcept,      // keys from the "TEXTS" concept embedding
  kValueConcept,    // values from the "TEXTS" concept embedding
  kQueryAbstract,   // queries from the concept-enhanced features
  kKeyDetector,     // keys from the text-detector features
  kValueDetector,   // values from the text-detector features
};

std::string_view to_string(ProjectionRole role);

// Row-vector convention: projected = input[n x d_in] * weight[d_in x d_out].
struct LinearProjection {
  ProjectionRole role{};
  Tensor weight;

  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
  Tensor apply(const Tensor& input) const;

  static LinearProjection random(ProjectionRole role, std::size_t d_in,
                                 std::size_t d_out, std::uint64_t seed);
};

struct AttentionProjections {
  const LinearProjection& query;
  const LinearProjection& key;
  const LinearProjection& value;
};

// Intermediates retained for the backward pass.
struct AttentionResult {
  Tensor output;   // [n_q x d_v]
  Tensor weights;  // [n_q x n_kv], row-stochastic
  Tensor q, k, v;  // projected query/key/value
};

// softmax(Q K^T / sqrt(d)) V with Q = query_src Wq, K = kv_src Wk,
// V = kv_src Wv, d = projected query/key width. Single head.
AttentionResult cross_attention(const Tensor& query_src, const Tensor& kv_src,
                                const AttentionProjections& proj);

struct AttentionGradients {
  Tensor query_weight;
  Tensor key_weight;
  Tensor value_weight;
  Tensor query_src;
  Tensor kv_src;
};

AttentionGradients cross_attention_backward(const Tensor& query_src,
                                            const Tensor& kv_src,
                                            const AttentionProjections& proj,
                                            const AttentionResult& forward,
                                            const Tensor& grad_output);

}  // namespace textsr
