#include <cmath>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "ldgd/likelihoods.hpp"
#include "ldgd/pipeline.hpp"

using namespace ldgd;
using testing::straight_line_elbo;

namespace {

std::vector<Index> all_rows(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

void perturb(ParameterVector& p, std::uint64_t seed, double size) {
  RandomSource rng(seed);
  p.storage() += size * rng.normal_matrix(p.size(), 1).col(0);
}

Dataset tiny_data(std::uint64_t seed, Index n, Index d, Index k) {
  RandomSource rng(seed);
  std::vector<Index> labels;
  for (Index i = 0; i < n; ++i) labels.push_back(i % k);
  return make_dataset(rng.normal_matrix(n, d), labels, k);
}

ModelConfig tiny_config(Index q, Index m) {
  ModelConfig c;
  c.latent_dims = q;
  c.inducing_reg = m;
  c.inducing_cls = m;
  return c;
}

}  // namespace

TEST_CASE("prior-initialized model has zero KL terms") {
  const Dataset data = tiny_data(1, 10, 3, 2);
  LdgdModel model = LdgdModel::initialize(data, tiny_config(2, 4), 3);
  model.params().set_value("latent.mu", Matrix::Zero(10, 2));
  model.params().set_value("latent.scale", Matrix::Ones(10, 2));
  RandomSource rng(4);
  const ElboReport r = model.elbo(data, all_rows(10), rng, 1);
  CHECK(r.kl_x == 0.0);
  CHECK(r.kl_u_reg == 0.0);
  CHECK(r.kl_u_cls == 0.0);
  CHECK(r.elbo == r.ell_reg + r.ell_cls);
}

TEST_CASE("ELBO matches an independent straight-line evaluation") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    CAPTURE(seed);
    const Dataset data = tiny_data(seed, 6, 2, 1);
    ModelConfig cfg = tiny_config(2, 2);
    cfg.quadrature_order = 3;
    LdgdModel model = LdgdModel::initialize(data, cfg, seed);
    perturb(model.params(), seed + 100, 0.3);
    RandomSource rng(seed + 7);
    const Matrix eps = rng.normal_matrix(6, 2);
    const ElboReport got = model.elbo_with_noise(data, all_rows(6), eps);
    const ElboReport want = straight_line_elbo(model, data, all_rows(6), eps);
    CHECK(std::abs(got.ell_reg - want.ell_reg) < 1e-10);
    CHECK(std::abs(got.ell_cls - want.ell_cls) < 1e-10);
    CHECK(std::abs(got.kl_x - want.kl_x) < 1e-10);
    CHECK(std::abs(got.kl_u_reg - want.kl_u_reg) < 1e-10);
    CHECK(std::abs(got.kl_u_cls - want.kl_u_cls) < 1e-10);
    CHECK(std::abs(got.elbo - want.elbo) < 1e-10);
  }
  // minibatch, two classes, two samples
  const Dataset data = tiny_data(9, 8, 3, 2);
  ModelConfig cfg = tiny_config(2, 3);
  cfg.quadrature_order = 3;
  LdgdModel model = LdgdModel::initialize(data, cfg, 9);
  perturb(model.params(), 19, 0.3);
  const std::vector<Index> batch{5, 1, 6};
  RandomSource rng(10);
  const Matrix eps = rng.normal_matrix(6, 2);
  CHECK(std::abs(model.elbo_with_noise(data, batch, eps).elbo - straight_line_elbo(model, data, batch, eps).elbo) < 1e-10);
}

TEST_CASE("minibatch scaling is unbiased over a partition") {
  const Dataset data = tiny_data(11, 12, 2, 2);
  LdgdModel model = LdgdModel::initialize(data, tiny_config(2, 3), 11);
  perturb(model.params(), 12, 0.2);
  RandomSource rng(13);
  const Matrix eps = rng.normal_matrix(12, 2);
  const ElboReport full = model.elbo_with_noise(data, all_rows(12), eps);
  double mean = 0.0;
  for (Index start = 0; start < 12; start += 4) {
    std::vector<Index> batch;
    for (Index i = start; i < start + 4; ++i) batch.push_back(i);
    mean += model.elbo_with_noise(data, batch, eps.middleRows(start, 4)).elbo / 3.0;
  }
  CHECK(std::abs(mean - full.elbo) < 1e-9 * std::abs(full.elbo));

  RandomSource a(14), b(14);
  CHECK(model.elbo(data, all_rows(12), a, 2).elbo == model.elbo(data, all_rows(12), b, 2).elbo);
}

TEST_CASE("each latent row only touches its own terms") {
  const Dataset data = tiny_data(15, 6, 2, 2);
  LdgdModel model = LdgdModel::initialize(data, tiny_config(2, 3), 15);
  const std::vector<Index> batch{3};
  RandomSource rng(16);
  const Objective f = model.elbo_objective(data, batch, rng.normal_matrix(1, 2));
  const Vector g = gradient(f, model.params());
  const ParameterBlock& mu = model.params().block("latent.mu");
  for (Index q = 0; q < 2; ++q)
    for (Index i = 0; i < 6; ++i) {
      const double gi = g(mu.offset + q * 6 + i);
      if (i == 3) {
        CHECK(gi != 0.0);
      } else {
        CHECK(gi == 0.0);
      }
    }
}

TEST_CASE("training is deterministic and the trace satisfies the report invariants") {
  const Dataset data = tiny_data(17, 30, 3, 2);
  TrainConfig tc;
  tc.iters = 60;
  tc.batch_size = 10;
  tc.seed = 5;
  LdgdModel a = LdgdModel::initialize(data, tiny_config(2, 4), 5);
  LdgdModel b = LdgdModel::initialize(data, tiny_config(2, 4), 5);
  const TrainResult ra = a.train(data, tc);
  const TrainResult rb = b.train(data, tc);
  REQUIRE(ra.trace.size() == 60);
  for (std::size_t i = 0; i < ra.trace.size(); ++i) {
    const ElboReport& r = ra.trace[i];
    CHECK(r.elbo == rb.trace[i].elbo);
    CHECK(r.iteration == static_cast<long>(i));
    CHECK(std::abs(r.elbo - (r.ell_reg + r.ell_cls - r.kl_x - r.kl_u_reg - r.kl_u_cls)) <= 1e-12 * std::abs(r.elbo));
    CHECK(r.kl_x >= 0.0);
    CHECK(r.kl_u_reg >= 0.0);
    CHECK(r.kl_u_cls >= 0.0);
  }
  CHECK(a.params().storage() == b.params().storage());
  CHECK(ra.final_report.elbo == rb.final_report.elbo);
}

TEST_CASE("decode and generate at the prior") {
  const Dataset data = tiny_data(18, 10, 3, 1);
  const LdgdModel model = LdgdModel::initialize(data, tiny_config(2, 3), 18);
  RandomSource rng(19);
  const Matrix pts = rng.normal_matrix(7, 2);
  const Decoded d = model.decode_labels(pts);
  CHECK(testing::max_abs(d.probabilities.array() - 0.5) == 0.0);
  const Generated g = model.generate(pts);
  CHECK(testing::max_abs(g.mean) == 0.0);
  CHECK(g.mean.cols() == 3);
  CHECK((g.noisy_variance - g.variance).minCoeff() > 0.0);
}

TEST_CASE("decoded probabilities compose the class-probability map") {
  const Dataset data = tiny_data(20, 10, 3, 3);
  LdgdModel model = LdgdModel::initialize(data, tiny_config(2, 3), 20);
  perturb(model.params(), 21, 0.5);
  RandomSource rng(22);
  const Matrix pts = rng.normal_matrix(9, 2);
  const Decoded d = model.decode_labels(pts);
  const PredictiveGaussian g = predictive(model.classification_path(), pts);
  for (Index i = 0; i < 9; ++i) {
    for (Index c = 0; c < 3; ++c) {
      CHECK(std::abs(d.probabilities(i, c) - class_probability(g.mean(i, c), g.variance(i, c))) < 1e-12);
      CHECK(d.probabilities(i, c) >= 0.0);
      CHECK(d.probabilities(i, c) <= 1.0);
    }
    Index arg;
    d.probabilities.row(i).maxCoeff(&arg);
    CHECK(d.labels[static_cast<std::size_t>(i)] == arg);
  }
}

TEST_CASE("test-time inference") {
  const Dataset data = tiny_data(23, 20, 3, 2);
  SUBCASE("free-form latent runs the optimizer and is thread-count invariant") {
    LdgdModel model = LdgdModel::initialize(data, tiny_config(2, 4), 23);
    TestConfig tc;
    tc.iters = 30;
    const TestInference one = model.infer_test_latent(data.yr.topRows(5), tc);
    tc.threads = 3;
    const TestInference three = model.infer_test_latent(data.yr.topRows(5), tc);
    CHECK(one.iterations == 30);
    CHECK(one.latent.mean == three.latent.mean);
    CHECK(one.latent.scale == three.latent.scale);
    CHECK(one.latent.scale.minCoeff() > 0.0);
    CHECK_THROWS_AS(model.infer_test_latent(Matrix::Zero(2, 4), tc), ValidationError);
  }
  SUBCASE("amortized latent is a single encoder pass") {
    ModelConfig cfg = tiny_config(2, 4);
    cfg.kind = LatentKind::amortized;
    cfg.encoder_hidden = {5};
    const LdgdModel model = LdgdModel::initialize(data, cfg, 23);
    const TestInference t = model.infer_test_latent(data.yr.topRows(5), TestConfig{});
    CHECK(t.iterations == 0);
    CHECK(t.latent.mean == model.encode(data.yr.topRows(5)).mean);
  }
}

TEST_CASE("checkpoint round trip reproduces the final ELBO") {
  const Dataset raw = tiny_data(24, 40, 4, 2);
  for (LatentKind kind : {LatentKind::free_form, LatentKind::amortized}) {
    PipelineOptions opt;
    opt.model = tiny_config(2, 5);
    opt.model.kind = kind;
    opt.model.encoder_hidden = {6};
    opt.train.iters = 40;
    opt.train.batch_size = 16;
    std::vector<Index> train, test;
    for (Index i = 0; i < 40; ++i) (i % 5 == 0 ? test : train).push_back(i);
    const Checkpoint c = fit_checkpoint(raw, train, test, opt);
    const auto path = testing::scratch(std::string("ckpt_") + std::string(to_string(kind)) + ".json");
    save_checkpoint(path, c);
    const Checkpoint back = load_checkpoint(path);
    CHECK(back.model.params().storage() == c.model.params().storage());
    CHECK(back.train_rows == c.train_rows);
    CHECK(back.test_rows == c.test_rows);
    const ElboReport again = back.model.report(training_data(back, raw), back.report_seed, back.report_samples);
    CHECK(std::abs(again.elbo - c.final_report.elbo) < 1e-9);
    CHECK(checkpoint_to_json(back).dump() == checkpoint_to_json(c).dump());
  }
  CHECK_THROWS_AS(load_checkpoint(testing::scratch("no_such_checkpoint.json")), IoError);
  {
    std::ofstream bad(testing::scratch("bad_ckpt.json"));
    bad << "{\"format_version\": 99}";
  }
  CHECK_THROWS_AS(load_checkpoint(testing::scratch("bad_ckpt.json")), ValidationError);
}

TEST_CASE("config validation") {
  ModelConfig c;
  c.latent_dims = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  ModelConfig f;
  f.kind = LatentKind::amortized;
  f.encoder_hidden.clear();
  CHECK_THROWS_AS(f.validate(), ValidationError);
  const Dataset data = tiny_data(25, 10, 3, 2);
  LdgdModel model = LdgdModel::initialize(data, tiny_config(2, 3), 25);
  TrainConfig tc;
  tc.iters = 1;
  CHECK_THROWS_AS(model.train(tiny_data(25, 10, 4, 2), tc), ValidationError);
}
