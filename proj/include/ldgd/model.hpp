#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldgd/baselines.hpp"
#include "ldgd/data.hpp"
#include "ldgd/latent.hpp"
#include "ldgd/optim.hpp"
#include "ldgd/svgp.hpp"

namespace ldgd {

enum class LatentKind { free_form, amortized };
enum class LatentInit { ppca, random };
enum class InducingInit { normal, subset };

std::string_view to_string(LatentKind k);
std::string_view to_string(LatentInit k);
std::string_view to_string(InducingInit k);
LatentKind latent_kind_from_string(std::string_view s);
LatentInit latent_init_from_string(std::string_view s);
InducingInit inducing_init_from_string(std::string_view s);

struct ModelConfig {
  LatentKind kind = LatentKind::free_form;
  Index latent_dims = 2;
  Index inducing_reg = 25;
  Index inducing_cls = 25;
  int quadrature_order = 20;
  int samples = 1;  // latent draws per training step
  double jitter = 1e-6;
  LatentInit latent_init = LatentInit::ppca;
  InducingInit inducing_init = InducingInit::normal;
  std::vector<Index> encoder_hidden{64, 32};
  double alpha_init = 1.0;
  double initial_scale = 0.5;
  double noise_floor = 1e-4;
  // Regression-only model over a known, fixed latent (sparse GP regression).
  bool include_classification = true;
  bool fixed_latent = false;

  void validate() const;
};

struct ElboReport {
  double ell_reg = 0.0;
  double ell_cls = 0.0;
  double kl_x = 0.0;
  double kl_u_reg = 0.0;
  double kl_u_cls = 0.0;
  double elbo = 0.0;
  long iteration = -1;
};

struct TrainConfig {
  Index batch_size = 100;
  double lr = 0.01;
  long iters = 1500;
  std::uint64_t seed = 0;
  int report_samples = 16;
};

struct TrainResult {
  std::vector<ElboReport> trace;
  ElboReport final_report;
};

/// Thrown when training hits a non-finite ELBO; carries the trace so far.
class TrainingAborted : public NumericalFailure {
 public:
  TrainingAborted(const std::string& what, std::vector<ElboReport> trace)
      : NumericalFailure(what), trace_(std::move(trace)) {}
  [[nodiscard]] const std::vector<ElboReport>& trace() const { return trace_; }

 private:
  std::vector<ElboReport> trace_;
};

struct TestConfig {
  double lr = 0.01;
  long iters = 500;
  bool ppca_init = false;
  int threads = 1;
  std::uint64_t seed = 0;
};

struct TestInference {
  FreeFormLatent latent;
  long iterations = 0;
  double objective = 0.0;  // final regression ELL minus latent KL
};

struct Decoded {
  Matrix probabilities;  // N x K, independent per class
  std::vector<Index> labels;
};

struct Generated {
  Matrix mean;            // P x D
  Matrix variance;        // latent function variance
  Matrix noisy_variance;  // variance plus observation noise
};

class LdgdModel {
 public:
  /// Builds a model sized for `train` with initialized parameters.
  static LdgdModel initialize(const Dataset& train, const ModelConfig& config, std::uint64_t seed);
  /// Regression-only model over a fixed latent (config.fixed_latent).
  static LdgdModel initialize_fixed(const Matrix& latent, const Matrix& y, const ModelConfig& config, std::uint64_t seed);

  LdgdModel(ModelConfig config, Index n, Index d, Index k, ParameterVector params);

  /// ELBO over the given rows with freshly drawn latent noise.
  ElboReport elbo(const Dataset& data, std::span<const Index> batch, RandomSource& rng, int samples) const;
  /// ELBO with explicit noise eps ((samples * B) x Q, sample-major).
  ElboReport elbo_with_noise(const Dataset& data, std::span<const Index> batch, const Matrix& eps) const;
  /// Full-data ELBO with `samples` draws from the "report" substream of seed.
  ElboReport report(const Dataset& data, std::uint64_t seed, int samples) const;

  ad::Var elbo_node(ad::Tape& tape, const BoundParameters& bound, const Dataset& data, std::span<const Index> batch,
                    const Matrix& eps, ElboReport* parts = nullptr) const;
  Objective elbo_objective(const Dataset& data, std::vector<Index> batch, Matrix eps) const;

  TrainResult train(const Dataset& data, const TrainConfig& config);

  /// Test-time latent for rows of y with everything else frozen. Amortized
  /// models answer with a single encoder pass and zero iterations.
  TestInference infer_test_latent(const Matrix& y, const TestConfig& config) const;
  FreeFormLatent encode(const Matrix& y) const;
  /// Latent posterior of the training rows.
  FreeFormLatent training_latent(const Dataset& data) const;

  Decoded decode_labels(const Matrix& latent_mean) const;
  Generated generate(const Matrix& points) const;

  [[nodiscard]] SvgpPath regression_path() const;
  [[nodiscard]] SvgpPath classification_path() const;
  [[nodiscard]] RowVector noise() const;
  [[nodiscard]] AmortizedEncoder encoder() const;

  [[nodiscard]] const ModelConfig& config() const { return config_; }
  [[nodiscard]] const ParameterVector& params() const { return params_; }
  ParameterVector& params() { return params_; }
  [[nodiscard]] Index n() const { return n_; }
  [[nodiscard]] Index d() const { return d_; }
  [[nodiscard]] Index k() const { return k_; }
  [[nodiscard]] Index q() const { return config_.latent_dims; }

  /// Linear map used for PPCA-style test-time initialization.
  std::optional<PpcaModel> ppca;
  RowVector ppca_column_scale;
  /// Known latent positions when config.fixed_latent.
  Matrix fixed_latent;

 private:
  ModelConfig config_;
  Index n_ = 0;
  Index d_ = 0;
  Index k_ = 0;
  ParameterVector params_;
  QuadratureRule rule_;
};

}  // namespace ldgd
