#include "ldgd/latent.hpp"

#include <cmath>

namespace ldgd {

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

}  // namespace

AmortizedEncoder AmortizedEncoder::initialize(Index input_dims, const std::vector<Index>& hidden, Index latent_dims,
                                              RandomSource& rng, double initial_scale) {
  if (input_dims < 1 || latent_dims < 1) throw InvalidArgument("AmortizedEncoder: dimensions must be positive");
  if (!(initial_scale > 0.0)) throw InvalidArgument("AmortizedEncoder: initial scale must be positive");
  std::vector<Index> sizes{input_dims};
  for (Index h : hidden) {
    if (h < 1) throw InvalidArgument("AmortizedEncoder: hidden sizes must be positive");
    sizes.push_back(h);
  }
  sizes.push_back(2 * latent_dims);
  AmortizedEncoder enc;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double std = std::sqrt(2.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
    enc.weights.push_back(std * rng.normal_matrix(sizes[l], sizes[l + 1]));
    enc.biases.push_back(RowVector::Zero(sizes[l + 1]));
  }
  enc.biases.back().tail(latent_dims).setConstant(std::log(std::expm1(initial_scale)));
  return enc;
}

Matrix sample_latent(const Matrix& mean, const Matrix& scale, const Matrix& eps) {
  if (mean.rows() != scale.rows() || mean.cols() != scale.cols() || eps.rows() != mean.rows() ||
      eps.cols() != mean.cols()) {
    throw InvalidArgument("sample_latent: shape mismatch");
  }
  return mean + scale.cwiseProduct(eps);
}

double kl_latent(const Matrix& mean, const Matrix& scale) {
  if (mean.rows() != scale.rows() || mean.cols() != scale.cols()) throw InvalidArgument("kl_latent: shape mismatch");
  return 0.5 * (mean.array().square() + scale.array().square() - 1.0 - 2.0 * scale.array().log()).sum();
}

FreeFormLatent encode(const AmortizedEncoder& encoder, const Matrix& y) {
  if (y.cols() != encoder.input_dims()) throw InvalidArgument("encode: input has wrong column count");
  Matrix h = y;
  for (std::size_t l = 0; l < encoder.layers(); ++l) {
    h = (h * encoder.weights[l]).rowwise() + encoder.biases[l];
    if (l + 1 < encoder.layers()) h = h.array().tanh().matrix();
  }
  const Index q = encoder.latent_dims();
  return {h.leftCols(q), h.rightCols(q).unaryExpr([](double x) { return softplus(x); })};
}

namespace ad {

Var sample_latent(const Var& mean, const Var& sd, const Matrix& eps) {
  return add(mean, hadamard(sd, mean.tape()->constant(eps)));
}

Var kl_latent(const Var& mean, const Var& sd, const Var& log_sd) {
  const double count = static_cast<double>(mean.rows() * mean.cols());
  Var total = add(sum(square(mean)), sum(square(sd)));
  total = sub(total, scale(sum(log_sd), 2.0));
  return scale(add_scalar(total, -count), 0.5);
}

EncodedLatent encode(const EncoderNodes& encoder, const Var& y) {
  Var h = y;
  const std::size_t layers = encoder.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    h = add(matmul(h, encoder.weights[l]), broadcast_row(encoder.biases[l], h.rows()));
    if (l + 1 < layers) h = tanh(h);
  }
  const Index q = h.cols() / 2;
  return {slice_cols(h, 0, q), softplus(slice_cols(h, q, q))};
}

}  // namespace ad
}  // namespace ldgd
