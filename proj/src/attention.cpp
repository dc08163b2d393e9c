#include "textsr/attention.hpp"

#include <cmath>

#include "textsr/error.hpp"
#include "textsr/rng.hpp"

namespace textsr {

std::string_view to_string(ProjectionRole role) {
  switch (role) {
    case ProjectionRole::kQueryVisual: return "query_visual";
    case ProjectionRole::kKeyConcept: return "key_concept";
    case ProjectionRole::kValueConcept: return "value_concept";
    case ProjectionRole::kQueryAbstract: return "query_abstract";
    case ProjectionRole::kKeyDetector: return "key_detector";
    case ProjectionRole::kValueDetector: return "value_detector";
  }
  return "unknown";
}

Tensor LinearProjection::apply(const Tensor& input) const {
  if (input.rank() != 2 || input.dim(1) != in_features()) {
    throw ShapeError("projection " + std::string(to_string(role)) +
                     " expects [n x " + std::to_string(in_features()) +
                     "] input, got " + textsr::to_string(input.shape()));
  }
  return matmul(input, weight);
}

LinearProjection LinearProjection::random(ProjectionRole role,
                                          std::size_t d_in, std::size_t d_out,
                                          std::uint64_t seed) {
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(role)));
  Tensor w({d_in, d_out});
  const double s = 1.0 / std::sqrt(static_cast<double>(d_in));
  for (auto& v : w.values()) v = s * rng.normal();
  return {role, std::move(w)};
}

AttentionResult cross_attention(const Tensor& query_src, const Tensor& kv_src,
                                const AttentionProjections& proj) {
  const std::size_t d = proj.query.out_features();
  if (d == 0 || proj.key.out_features() != d) {
    throw ShapeError("cross_attention: query/key widths must match and be "
                     "positive, got " + std::to_string(d) + " and " +
                     std::to_string(proj.key.out_features()));
  }
  if (proj.key.in_features() != proj.value.in_features()) {
    throw ShapeError("cross_attention: key and value projections disagree on "
                     "input width");
  }
  AttentionResult r;
  r.q = proj.query.apply(query_src);
  r.k = proj.key.apply(kv_src);
  r.v = proj.value.apply(kv_src);
  Tensor scores = matmul(r.q, transpose(r.k));
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto& s : scores.values()) s *= inv_sqrt_d;
  require_finite(scores, "cross_attention scores");
  r.weights = softmax_rows(scores);
  r.output = matmul(r.weights, r.v);
  require_finite(r.output, "cross_attention output");
  return r;
}

AttentionGradients cross_attention_backward(const Tensor& query_src,
                                            const Tensor& kv_src,
                                            const AttentionProjections& proj,
                                            const AttentionResult& fwd,
                                            const Tensor& grad_output) {
  if (grad_output.shape() != fwd.output.shape()) {
    throw ShapeError("cross_attention_backward: gradient shape " +
                     to_string(grad_output.shape()) + " != output shape " +
                     to_string(fwd.output.shape()));
  }
  const std::size_t n_q = fwd.weights.dim(0), n_kv = fwd.weights.dim(1);
  const double inv_sqrt_d =
      1.0 / std::sqrt(static_cast<double>(proj.query.out_features()));

  Tensor grad_v = matmul(transpose(fwd.weights), grad_output);
  Tensor grad_a = matmul(grad_output, transpose(fwd.v));

  // Softmax Jacobian per row: dS = A * (dA - <dA, A>), then the 1/sqrt(d).
  Tensor grad_s({n_q, n_kv});
  for (std::size_t i = 0; i < n_q; ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < n_kv; ++j)
      dot += grad_a.at(i, j) * fwd.weights.at(i, j);
    for (std::size_t j = 0; j < n_kv; ++j)
      grad_s.at(i, j) =
          fwd.weights.at(i, j) * (grad_a.at(i, j) - dot) * inv_sqrt_d;
  }
  Tensor grad_q = matmul(grad_s, fwd.k);
  Tensor grad_k = matmul(transpose(grad_s), fwd.q);

  AttentionGradients g;
  g.query_weight = matmul(transpose(query_src), grad_q);
  g.key_weight = matmul(transpose(kv_src), grad_k);
  g.value_weight = matmul(transpose(kv_src), grad_v);
  g.query_src = matmul(grad_q, transpose(proj.query.weight));
  g.kv_src = add(matmul(grad_k, transpose(proj.key.weight)),
                 matmul(grad_v, transpose(proj.value.weight)));
  return g;
}

}  // namespace textsr
