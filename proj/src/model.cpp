#include "ldgd/model.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ldgd/likelihoods.hpp"

namespace ldgd {

std::string_view to_string(LatentKind k) { return k == LatentKind::free_form ? "ldgd" : "fast_ldgd"; }
std::string_view to_string(LatentInit k) { return k == LatentInit::ppca ? "ppca" : "random"; }
std::string_view to_string(InducingInit k) { return k == InducingInit::normal ? "normal" : "subset"; }

LatentKind latent_kind_from_string(std::string_view s) {
  if (s == "ldgd") return LatentKind::free_form;
  if (s == "fast_ldgd") return LatentKind::amortized;
  throw ValidationError("unknown model kind '" + std::string(s) + "' (expected ldgd or fast_ldgd)");
}

LatentInit latent_init_from_string(std::string_view s) {
  if (s == "ppca") return LatentInit::ppca;
  if (s == "random") return LatentInit::random;
  throw ValidationError("unknown latent init '" + std::string(s) + "' (expected ppca or random)");
}

InducingInit inducing_init_from_string(std::string_view s) {
  if (s == "normal") return InducingInit::normal;
  if (s == "subset") return InducingInit::subset;
  throw ValidationError("unknown inducing init '" + std::string(s) + "' (expected normal or subset)");
}

void ModelConfig::validate() const {
  if (latent_dims < 1) throw ValidationError("Q must be positive");
  if (inducing_reg < 1 || inducing_cls < 1) throw ValidationError("inducing counts must be positive");
  if (quadrature_order < 1 || quadrature_order > 100) throw ValidationError("quadrature order must be in 1..100");
  if (samples < 1) throw ValidationError("latent samples per step must be positive");
  if (!(jitter >= 0.0)) throw ValidationError("jitter must be non-negative");
  if (!(alpha_init > 0.0) || !(initial_scale > 0.0) || !(noise_floor > 0.0)) {
    throw ValidationError("alpha_init, initial_scale and noise_floor must be positive");
  }
  if (kind == LatentKind::amortized) {
    if (encoder_hidden.empty()) throw ValidationError("fast_ldgd needs encoder hidden sizes");
    for (Index h : encoder_hidden)
      if (h < 1) throw ValidationError("encoder hidden sizes must be positive");
  }
  if (fixed_latent && include_classification) throw ValidationError("a fixed latent is only supported regression-only");
}

namespace {

std::string encoder_weight(std::size_t l) { return "encoder.w" + std::to_string(l); }
std::string encoder_bias(std::size_t l) { return "encoder.b" + std::to_string(l); }

void add_path(ParameterVector& p, const std::string& prefix, Index m, Index q, Index columns, double alpha,
              Matrix inducing) {
  p.add(prefix + ".kernel.variance", Matrix::Ones(1, 1), Transform::log);
  p.add(prefix + ".kernel.alpha", Matrix::Constant(1, q, alpha), Transform::log);
  p.add(prefix + ".inducing", inducing);
  p.add(prefix + ".q_mean", Matrix::Zero(m, columns));
  // Lower triangle with a log-stored diagonal; zeros give W = I.
  p.add_raw(prefix + ".q_sqrt", Matrix::Zero(m, m * columns));
}

Matrix column_noise(const Matrix& y, double floor) {
  Matrix out(1, y.cols());
  for (Index j = 0; j < y.cols(); ++j) {
    const double mean = y.col(j).mean();
    const double var = (y.col(j).array() - mean).square().mean();
    out(0, j) = std::max(0.1 * var, floor);
  }
  return out;
}

Matrix inducing_draw(const ModelConfig& cfg, Index m, const Matrix& latent_mean, RandomSource rng) {
  if (cfg.inducing_init == InducingInit::subset && latent_mean.rows() >= m) {
    const std::vector<Index> perm = rng.permutation(latent_mean.rows());
    Matrix z(m, latent_mean.cols());
    for (Index i = 0; i < m; ++i) z.row(i) = latent_mean.row(perm[static_cast<std::size_t>(i)]);
    return z;
  }
  return rng.normal_matrix(m, cfg.latent_dims);
}

ad::PathNodes bind_path(const BoundParameters& bp, const std::string& prefix, double jitter) {
  ad::PathNodes p;
  p.variance = bp[prefix + ".kernel.variance"];
  p.alpha = bp[prefix + ".kernel.alpha"];
  p.inducing = bp[prefix + ".inducing"];
  p.q_mean = bp[prefix + ".q_mean"];
  p.q_sqrt_raw = bp.raw(prefix + ".q_sqrt");
  p.jitter = jitter;
  return p;
}

SvgpPath read_path(const ParameterVector& p, const std::string& prefix, double jitter) {
  SvgpPath path;
  path.kernel = ArdKernel(p.value(prefix + ".kernel.variance")(0, 0), p.value(prefix + ".kernel.alpha").row(0));
  path.inducing = p.value(prefix + ".inducing");
  path.q_mean = p.value(prefix + ".q_mean");
  const Matrix raw = p.raw(prefix + ".q_sqrt");
  const Index m = raw.rows();
  for (Index c = 0; c < path.q_mean.cols(); ++c) {
    Matrix w = raw.middleCols(c * m, m).triangularView<Eigen::StrictlyLower>();
    w.diagonal() = raw.middleCols(c * m, m).diagonal().array().exp();
    path.q_sqrt.push_back(std::move(w));
  }
  path.jitter = jitter;
  return path;
}

Matrix gather(const Matrix& m, std::span<const Index> rows, int copies) {
  const Index b = static_cast<Index>(rows.size());
  Matrix out(b * copies, m.cols());
  for (int j = 0; j < copies; ++j)
    for (Index i = 0; i < b; ++i) out.row(j * b + i) = m.row(rows[static_cast<std::size_t>(i)]);
  return out;
}

ad::Var tile(const ad::Var& v, int copies) {
  if (copies == 1) return v;
  std::vector<ad::Var> parts(static_cast<std::size_t>(copies), v);
  return ad::vstack(parts);
}

}  // namespace

LdgdModel::LdgdModel(ModelConfig config, Index n, Index d, Index k, ParameterVector params)
    : config_(std::move(config)), n_(n), d_(d), k_(k), params_(std::move(params)),
      rule_(gauss_hermite(config_.quadrature_order)) {
  config_.validate();
}

LdgdModel LdgdModel::initialize(const Dataset& train, const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.fixed_latent) throw ValidationError("use initialize_fixed for a fixed latent");
  if (train.n() < 1 || train.d() < 1 || train.k() < 1) throw ValidationError("training data is empty");
  const Index n = train.n(), d = train.d(), k = train.k(), q = cfg.latent_dims;
  RandomSource root(seed);

  Matrix mu;
  std::optional<PpcaModel> ppca;
  RowVector column_scale;
  {
    RandomSource rng = root.substream("latent-init");
    mu = 0.1 * rng.normal_matrix(n, q);
    const Index qp = std::min({q, d - 1, n - 1});
    if (cfg.latent_init == LatentInit::ppca && qp >= 1) {
      try {
        ppca = fit_ppca(train.yr, qp);
      } catch (const NumericalFailure&) {
        ppca.reset();
      }
      if (ppca) {
        Matrix proj = ppca_project(*ppca, train.yr);
        column_scale = RowVector::Ones(qp);
        for (Index j = 0; j < qp; ++j) {
          const double mean = proj.col(j).mean();
          const double sd = std::sqrt((proj.col(j).array() - mean).square().mean());
          if (sd > 1e-12) column_scale(j) = 1.0 / sd;
        }
        mu.leftCols(qp) = (proj.array().rowwise() * column_scale.array()).matrix();
      }
    }
  }

  ParameterVector p;
  add_path(p, "reg", cfg.inducing_reg, q, d, cfg.alpha_init, inducing_draw(cfg, cfg.inducing_reg, mu, root.substream("inducing-reg")));
  p.add("reg.noise", column_noise(train.yr, cfg.noise_floor), Transform::log);
  if (cfg.include_classification) {
    add_path(p, "cls", cfg.inducing_cls, q, k, cfg.alpha_init, inducing_draw(cfg, cfg.inducing_cls, mu, root.substream("inducing-cls")));
  }
  if (cfg.kind == LatentKind::free_form) {
    p.add("latent.mu", mu);
    p.add("latent.scale", Matrix::Constant(n, q, cfg.initial_scale), Transform::log);
  } else {
    RandomSource rng = root.substream("encoder");
    const AmortizedEncoder enc = AmortizedEncoder::initialize(d, cfg.encoder_hidden, q, rng, cfg.initial_scale);
    for (std::size_t l = 0; l < enc.layers(); ++l) {
      p.add(encoder_weight(l), enc.weights[l]);
      p.add(encoder_bias(l), enc.biases[l]);
    }
  }
  LdgdModel model(cfg, n, d, k, std::move(p));
  model.ppca = std::move(ppca);
  model.ppca_column_scale = column_scale;
  return model;
}

LdgdModel LdgdModel::initialize_fixed(const Matrix& latent, const Matrix& y, const ModelConfig& config,
                                      std::uint64_t seed) {
  ModelConfig cfg = config;
  cfg.fixed_latent = true;
  cfg.include_classification = false;
  cfg.latent_dims = latent.cols();
  cfg.validate();
  if (latent.rows() != y.rows()) throw ValidationError("fixed latent and targets differ in row count");
  RandomSource root(seed);
  ParameterVector p;
  add_path(p, "reg", cfg.inducing_reg, cfg.latent_dims, y.cols(), cfg.alpha_init,
           inducing_draw(cfg, cfg.inducing_reg, latent, root.substream("inducing-reg")));
  p.add("reg.noise", column_noise(y, cfg.noise_floor), Transform::log);
  LdgdModel model(cfg, y.rows(), y.cols(), 1, std::move(p));
  model.fixed_latent = latent;
  return model;
}

ad::Var LdgdModel::elbo_node(ad::Tape& t, const BoundParameters& bp, const Dataset& data, std::span<const Index> batch,
                             const Matrix& eps, ElboReport* parts) const {
  const Index b = static_cast<Index>(batch.size());
  if (b < 1) throw InvalidArgument("elbo: empty batch");
  if (data.d() != d_ || (config_.include_classification && data.k() != k_)) {
    throw ValidationError("elbo: data shape does not match the model");
  }
  if (eps.cols() != q() || eps.rows() % b != 0 || eps.rows() == 0) throw InvalidArgument("elbo: noise shape mismatch");
  const int copies = static_cast<int>(eps.rows() / b);
  for (Index i : batch)
    if (i < 0 || i >= data.n()) throw InvalidArgument("elbo: batch index out of range");

  ad::Var x;
  ad::Var kl_x;
  if (config_.fixed_latent) {
    if (fixed_latent.rows() != data.n()) throw ValidationError("elbo: fixed latent row count mismatch");
    x = t.constant(gather(fixed_latent, batch, copies));
    kl_x = t.constant(Matrix::Zero(1, 1));
  } else {
    ad::Var mu, sd, log_sd;
    if (config_.kind == LatentKind::free_form) {
      if (data.n() != n_) throw ValidationError("elbo: free-form latent was built for a different row count");
      mu = ad::gather_rows(bp["latent.mu"], batch);
      sd = ad::gather_rows(bp["latent.scale"], batch);
      log_sd = ad::gather_rows(bp.raw("latent.scale"), batch);
    } else {
      ad::EncoderNodes enc;
      for (std::size_t l = 0; bp.contains(encoder_weight(l)); ++l) {
        enc.weights.push_back(bp[encoder_weight(l)]);
        enc.biases.push_back(bp[encoder_bias(l)]);
      }
      const ad::EncodedLatent e = ad::encode(enc, t.constant(gather(data.yr, batch, 1)));
      mu = e.mean;
      sd = e.scale;
      log_sd = ad::log(sd);
    }
    x = ad::sample_latent(tile(mu, copies), tile(sd, copies), eps);
    kl_x = ad::kl_latent(mu, sd, log_sd);
  }

  const double inv_copies = 1.0 / static_cast<double>(copies);
  const ad::PathNodes reg = bind_path(bp, "reg", config_.jitter);
  const ad::Projection pr = ad::project(reg, x);
  const ad::Var log_noise = bp.raw("reg.noise");
  const ad::Var weighted = ad::weighted_variance_total(reg, pr, ad::exp(ad::scale(log_noise, -1.0)));
  ad::Var ell_reg = ad::ell_regression_total(ad::predictive_mean(reg, pr), gather(data.yr, batch, copies), log_noise,
                                            weighted);
  ell_reg = ad::scale(ell_reg, inv_copies);
  ad::Var kl_u_reg = ad::kl_inducing(reg);

  ad::Var ell_cls = t.constant(Matrix::Zero(1, 1));
  ad::Var kl_u_cls = t.constant(Matrix::Zero(1, 1));
  if (config_.include_classification) {
    const ad::PathNodes cls = bind_path(bp, "cls", config_.jitter);
    const ad::Projection pc = ad::project(cls, x);
    ell_cls = ad::ell_classification_total(ad::predictive_mean(cls, pc), ad::predictive_variance(cls, pc),
                                           gather(data.yc, batch, copies), rule_);
    ell_cls = ad::scale(ell_cls, inv_copies);
    kl_u_cls = ad::kl_inducing(cls);
  }

  const double ratio = static_cast<double>(data.n()) / static_cast<double>(b);
  const ad::Var s_reg = ad::scale(ell_reg, ratio);
  const ad::Var s_cls = ad::scale(ell_cls, ratio);
  const ad::Var s_klx = ad::scale(kl_x, ratio);
  ad::Var elbo = ad::sub(ad::sub(ad::sub(ad::add(s_reg, s_cls), s_klx), kl_u_reg), kl_u_cls);
  if (parts != nullptr) {
    parts->ell_reg = s_reg.scalar();
    parts->ell_cls = s_cls.scalar();
    parts->kl_x = s_klx.scalar();
    parts->kl_u_reg = kl_u_reg.scalar();
    parts->kl_u_cls = kl_u_cls.scalar();
    parts->elbo = elbo.scalar();
  }
  return elbo;
}

Objective LdgdModel::elbo_objective(const Dataset& data, std::vector<Index> batch, Matrix eps) const {
  return [this, &data, batch = std::move(batch), eps = std::move(eps)](ad::Tape& t, const BoundParameters& bp) {
    return elbo_node(t, bp, data, batch, eps);
  };
}

ElboReport LdgdModel::elbo_with_noise(const Dataset& data, std::span<const Index> batch, const Matrix& eps) const {
  ad::Tape tape;
  BoundParameters bound(tape, params_, false);
  ElboReport r;
  elbo_node(tape, bound, data, batch, eps, &r);
  return r;
}

ElboReport LdgdModel::elbo(const Dataset& data, std::span<const Index> batch, RandomSource& rng, int samples) const {
  return elbo_with_noise(data, batch, rng.normal_matrix(samples * static_cast<Index>(batch.size()), q()));
}

ElboReport LdgdModel::report(const Dataset& data, std::uint64_t seed, int samples) const {
  std::vector<Index> all(static_cast<std::size_t>(data.n()));
  for (Index i = 0; i < data.n(); ++i) all[static_cast<std::size_t>(i)] = i;
  RandomSource rng = RandomSource(seed).substream("report");
  return elbo(data, all, rng, samples);
}

TrainResult LdgdModel::train(const Dataset& data, const TrainConfig& cfg) {
  if (cfg.batch_size < 1 || !(cfg.lr > 0.0) || cfg.iters < 0 || cfg.report_samples < 1) {
    throw ValidationError("train: invalid configuration");
  }
  if (data.n() < 1) throw ValidationError("train: empty dataset");
  if (data.d() != d_ || (config_.include_classification && data.k() != k_)) {
    throw ValidationError("train: data shape does not match the model");
  }
  const Index n = data.n();
  const Index b = std::min(cfg.batch_size, n);
  RandomSource root(cfg.seed);
  RandomSource batch_rng = root.substream("batch");
  RandomSource eps_rng = root.substream("eps");
  AdamState adam(params_.size(), AdamConfig{cfg.lr});
  TrainResult result;
  result.trace.reserve(static_cast<std::size_t>(cfg.iters));

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::vector<Index> batch(static_cast<std::size_t>(b));
  for (long it = 0; it < cfg.iters; ++it) {
    if (b == n) {
      batch = order;
    } else {
      // partial Fisher-Yates over a persistent index array
      for (Index i = 0; i < b; ++i) {
        const Index j = i + batch_rng.index(n - i);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        batch[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(i)];
      }
    }
    const Matrix eps = eps_rng.normal_matrix(config_.samples * b, q());
    ElboReport r;
    Vector grad;
    try {
      ad::Tape tape;
      BoundParameters bound(tape, params_, true);
      ad::Var out = elbo_node(tape, bound, data, batch, eps, &r);
      if (!std::isfinite(r.elbo)) throw NumericalFailure("ELBO is not finite");
      tape.backward(out);
      grad = bound.gradient();
      grad *= -1.0;
      adam.step(params_.storage(), grad);
    } catch (const NumericalFailure& e) {
      throw TrainingAborted("training aborted at iteration " + std::to_string(it) + ": " + e.what(),
                            std::move(result.trace));
    }
    r.iteration = it;
    result.trace.push_back(r);
  }
  result.final_report = report(data, cfg.seed, cfg.report_samples);
  result.final_report.iteration = cfg.iters;
  return result;
}

FreeFormLatent LdgdModel::encode(const Matrix& y) const {
  return ldgd::encode(encoder(), y);
}

AmortizedEncoder LdgdModel::encoder() const {
  if (config_.kind != LatentKind::amortized) throw InvalidArgument("model has no encoder");
  AmortizedEncoder enc;
  for (std::size_t l = 0; params_.contains(encoder_weight(l)); ++l) {
    enc.weights.push_back(params_.value(encoder_weight(l)));
    enc.biases.push_back(params_.value(encoder_bias(l)).row(0));
  }
  return enc;
}

FreeFormLatent LdgdModel::training_latent(const Dataset& data) const {
  if (config_.fixed_latent) return {fixed_latent, Matrix::Zero(fixed_latent.rows(), fixed_latent.cols())};
  if (config_.kind == LatentKind::amortized) return encode(data.yr);
  return {params_.value("latent.mu"), params_.value("latent.scale")};
}

TestInference LdgdModel::infer_test_latent(const Matrix& y, const TestConfig& cfg) const {
  if (y.cols() != d_) throw ValidationError("test data has " + std::to_string(y.cols()) + " columns, model expects " +
                                            std::to_string(d_));
  if (config_.kind == LatentKind::amortized) return {encode(y), 0, 0.0};
  if (!(cfg.lr > 0.0) || cfg.iters < 0 || cfg.threads < 1) throw ValidationError("test inference: invalid configuration");

  const SvgpPath reg = regression_path();
  const Matrix log_noise = params_.raw("reg.noise");
  const RowVector inv_noise = (-log_noise.array()).exp().matrix().row(0);
  const Matrix lower = inducing_cholesky(reg).lower;
  Matrix sbar = Matrix::Zero(reg.num_inducing(), reg.num_inducing());
  for (Index c = 0; c < d_; ++c) {
    const Matrix& w = reg.q_sqrt[static_cast<std::size_t>(c)];
    Matrix wwt = w.triangularView<Eigen::Lower>() * w.transpose();
    sbar += inv_noise(c) * wwt;
  }
  const Index nt = y.rows();
  const Index qd = q();

  Matrix mu0 = Matrix::Zero(nt, qd);
  Matrix s0 = Matrix::Ones(nt, qd);
  if (cfg.ppca_init && ppca) {
    const Matrix proj = ppca_project(*ppca, y);
    mu0.leftCols(proj.cols()) = (proj.array().rowwise() * ppca_column_scale.array()).matrix();
    s0.setConstant(config_.initial_scale);
  }

  TestInference out;
  out.latent.mean.resize(nt, qd);
  out.latent.scale.resize(nt, qd);
  out.iterations = cfg.iters;
  std::vector<double> chunk_objective(static_cast<std::size_t>(cfg.threads), 0.0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.threads));

  auto run_chunk = [&](int worker, Index begin, Index end) {
    try {
      const Index rows = end - begin;
      if (rows <= 0) return;
      ParameterVector p;
      p.add("test.mu", mu0.middleRows(begin, rows));
      p.add("test.scale", s0.middleRows(begin, rows), Transform::log);
      std::vector<RandomSource> row_rng;
      for (Index i = begin; i < end; ++i) {
        row_rng.push_back(RandomSource(cfg.seed).substream("test-row-" + std::to_string(i)));
      }
      const Matrix ychunk = y.middleRows(begin, rows);
      AdamState adam(p.size(), AdamConfig{cfg.lr});
      Matrix eps(rows, qd);
      auto objective = [&](ad::Tape& t, const BoundParameters& bp) {
        ad::Var x = ad::sample_latent(bp["test.mu"], bp["test.scale"], eps);
        ad::Var kmb = ad::ard_gram(t.constant(reg.inducing), x, t.constant(Matrix::Constant(1, 1, reg.kernel.variance)),
                                   t.constant(reg.kernel.inv_lengthscales));
        ad::Var a = ad::tri_solve(t.constant(lower), kmb);
        ad::Var norms = ad::transpose(ad::col_sums(ad::square(a)));
        ad::Var deficit = ad::clamp_min(ad::add_scalar(ad::scale(norms, -1.0), reg.kernel.variance), 0.0);
        ad::Var weighted = ad::add(ad::scale(ad::sum(deficit), inv_noise.sum()),
                                   ad::sum(ad::hadamard(a, ad::matmul(t.constant(sbar), a))));
        ad::Var mean = ad::matmul_tn(a, t.constant(reg.q_mean));
        ad::Var ell = ad::ell_regression_total(mean, ychunk, t.constant(log_noise), weighted);
        ad::Var kl = ad::kl_latent(bp["test.mu"], bp["test.scale"], bp.raw("test.scale"));
        return ad::sub(ell, kl);
      };
      double value = 0.0;
      for (long it = 0; it < cfg.iters; ++it) {
        for (Index i = 0; i < rows; ++i)
          for (Index j = 0; j < qd; ++j) eps(i, j) = row_rng[static_cast<std::size_t>(i)].normal();
        const Vector g = gradient(objective, p, &value);
        adam.step(p.storage(), -g);
      }
      out.latent.mean.middleRows(begin, rows) = p.value("test.mu");
      out.latent.scale.middleRows(begin, rows) = p.value("test.scale");
      chunk_objective[static_cast<std::size_t>(worker)] = value;
    } catch (...) {
      errors[static_cast<std::size_t>(worker)] = std::current_exception();
    }
  };

  const int workers = static_cast<int>(std::min<Index>(cfg.threads, std::max<Index>(nt, 1)));
  if (workers <= 1) {
    run_chunk(0, 0, nt);
  } else {
    std::vector<std::thread> pool;
    const Index per = (nt + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const Index begin = std::min<Index>(nt, w * per);
      const Index end = std::min<Index>(nt, (w + 1) * per);
      pool.emplace_back([&run_chunk, w, begin, end] { run_chunk(w, begin, end); });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (double v : chunk_objective) out.objective += v;
  return out;
}

Decoded LdgdModel::decode_labels(const Matrix& latent_mean) const {
  if (!config_.include_classification) throw InvalidArgument("decode_labels: model has no classification path");
  if (latent_mean.cols() != q()) throw ValidationError("decode_labels: latent has the wrong dimension");
  const PredictiveGaussian pred = predictive(classification_path(), latent_mean);
  Decoded out;
  out.probabilities.resize(latent_mean.rows(), k_);
  for (Index i = 0; i < latent_mean.rows(); ++i)
    for (Index c = 0; c < k_; ++c) out.probabilities(i, c) = class_probability(pred.mean(i, c), pred.variance(i, c));
  out.labels = argmax_rows(out.probabilities);
  return out;
}

Generated LdgdModel::generate(const Matrix& points) const {
  if (points.cols() != q()) throw ValidationError("generate: latent points have the wrong dimension");
  Generated out;
  if (points.rows() == 0) {
    out.mean = out.variance = out.noisy_variance = Matrix(0, d_);
    return out;
  }
  const PredictiveGaussian pred = predictive(regression_path(), points);
  out.mean = pred.mean;
  out.variance = pred.variance;
  out.noisy_variance = pred.variance.rowwise() + noise();
  return out;
}

SvgpPath LdgdModel::regression_path() const { return read_path(params_, "reg", config_.jitter); }

SvgpPath LdgdModel::classification_path() const {
  if (!config_.include_classification) throw InvalidArgument("model has no classification path");
  return read_path(params_, "cls", config_.jitter);
}

RowVector LdgdModel::noise() const { return params_.value("reg.noise").row(0); }

}  // namespace ldgd
