#include "ldgd/gradcheck.hpp"

namespace ldgd {

GradcheckInstance run_gradcheck(std::uint64_t seed, const std::string& fault_block, const GradientCheckOptions& options) {
  RandomSource rng = RandomSource(seed).substream("gradcheck");
  GradcheckInstance g;
  g.seed = seed;
  g.kind = seed % 2 == 0 ? LatentKind::free_form : LatentKind::amortized;
  g.n = 4 + rng.index(5);
  g.d = 1 + rng.index(3);
  g.k = 1 + rng.index(2);
  g.q = 1 + rng.index(3);
  g.m_reg = 1 + rng.index(3);
  g.m_cls = 1 + rng.index(3);
  g.samples = 1 + static_cast<int>(rng.index(2));

  const Matrix y = rng.normal_matrix(g.n, g.d);
  std::vector<Index> labels;
  for (Index i = 0; i < g.n; ++i) labels.push_back(rng.index(std::max<Index>(g.k, 2)) % std::max<Index>(g.k, 1));
  const Dataset data = make_dataset(y, labels, g.k);

  ModelConfig cfg;
  cfg.kind = g.kind;
  cfg.latent_dims = g.q;
  cfg.inducing_reg = g.m_reg;
  cfg.inducing_cls = g.m_cls;
  cfg.samples = g.samples;
  cfg.encoder_hidden = {3};
  LdgdModel model = LdgdModel::initialize(data, cfg, seed);
  for (Index i = 0; i < model.params().size(); ++i) model.params().storage()(i) += 0.3 * rng.normal();

  const Index b = std::max<Index>(1, g.n - rng.index(3));
  const std::vector<Index> perm = rng.permutation(g.n);
  std::vector<Index> batch(perm.begin(), perm.begin() + b);
  const Objective objective = model.elbo_objective(data, batch, rng.normal_matrix(g.samples * b, g.q));
  Vector analytic = gradient(objective, model.params());
  if (!fault_block.empty()) {
    const ParameterBlock& blk = model.params().block(fault_block);
    analytic.segment(blk.offset, blk.size()).array() = 1.5 * analytic.segment(blk.offset, blk.size()).array() + 0.01;
  }
  g.report = check_gradient(objective, model.params(), analytic, options);
  return g;
}

}  // namespace ldgd
