#pragma once

#include <utility>
#include <vector>

#include "ldgd/autodiff.hpp"

namespace ldgd {

/// Per-row diagonal Gaussians q(x_i) = N(mean_i, diag(scale_i^2)).
struct FreeFormLatent {
  Matrix mean;   // N x Q
  Matrix scale;  // N x Q, standard deviations
};

/// Fully connected tanh network D -> hidden... -> 2Q. The first Q outputs
/// are means, the last Q pass through softplus to give scales.
struct AmortizedEncoder {
  std::vector<Matrix> weights;  // layer l: in_l x out_l
  std::vector<RowVector> biases;

  [[nodiscard]] Index input_dims() const { return weights.front().rows(); }
  [[nodiscard]] Index latent_dims() const { return weights.back().cols() / 2; }
  [[nodiscard]] std::size_t layers() const { return weights.size(); }

  /// Glorot-normal weights and zero biases, except the scale half of the
  /// output bias which starts at softplus^{-1}(initial_scale).
  static AmortizedEncoder initialize(Index input_dims, const std::vector<Index>& hidden, Index latent_dims,
                                     RandomSource& rng, double initial_scale = 0.5);
};

/// mean + scale .* eps.
Matrix sample_latent(const Matrix& mean, const Matrix& scale, const Matrix& eps);

/// sum over rows of KL(N(mean_i, diag(scale_i^2)) || N(0, I)).
double kl_latent(const Matrix& mean, const Matrix& scale);

/// Deterministic forward pass; returns (mean, scale).
FreeFormLatent encode(const AmortizedEncoder& encoder, const Matrix& y);

namespace ad {

Var sample_latent(const Var& mean, const Var& scale, const Matrix& eps);
/// log_scale is passed separately so a log-parameterized scale avoids a
/// log(exp(.)) round trip.
Var kl_latent(const Var& mean, const Var& scale, const Var& log_scale);

struct EncoderNodes {
  std::vector<Var> weights;
  std::vector<Var> biases;
};

struct EncodedLatent {
  Var mean;
  Var scale;
};

EncodedLatent encode(const EncoderNodes& encoder, const Var& y);

}  // namespace ad
}  // namespace ldgd
