#include "ldgd/autodiff.hpp"

#include <cmath>
#include <numbers>

#include "ldgd/kernels.hpp"

namespace ldgd::ad {

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
  }
}

Tape& tape_of(const Var& a) { return *a.tape(); }

}  // namespace

const Matrix& Var::value() const { return tape_->value(*this); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw InvalidArgument("Var::scalar: node is not 1x1");
  return v(0, 0);
}

Var Tape::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), true, false, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, false, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Tape::record(Matrix value, std::span<const Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& in : inputs) needs = needs || nodes_[in.id_].needs_grad;
  nodes_.push_back(Node{std::move(value), Matrix(), needs, false, needs ? std::move(backward) : nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(const Var& output) {
  auto& out = nodes_[output.id_];
  if (out.value.size() != 1) throw InvalidArgument("Tape::backward: output must be 1x1");
  if (!out.needs_grad) return;
  out.grad = Matrix::Ones(1, 1);
  out.has_grad = true;
  for (int i = output.id_; i >= 0; --i) {
    Node& node = nodes_[i];
    if (node.has_grad && node.backward) node.backward(*this, node.grad, node.value);
  }
}

Matrix Tape::grad(const Var& v) const {
  const Node& node = nodes_[v.id_];
  if (node.has_grad) return node.grad;
  return Matrix::Zero(node.value.rows(), node.value.cols());
}

const Matrix* Tape::grad_if_any(const Var& v) const {
  const Node& node = nodes_[v.id_];
  return node.has_grad ? &node.grad : nullptr;
}

void Tape::accumulate(const Var& v, const Matrix& g) { accumulate_expr(v, g); }

void Tape::accumulate(const Var& v, Matrix&& g) {
  auto& node = nodes_[v.id_];
  if (!node.needs_grad) return;
  if (!node.has_grad) {
    node.grad = std::move(g);
    node.has_grad = true;
  } else {
    node.grad += g;
  }
}

// ---- elementwise -----------------------------------------------------------

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  return tape_of(a).record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  return tape_of(a).record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    t.accumulate(a, g);
    t.accumulate_expr(b, -g);
  });
}

Var hadamard(const Var& a, const Var& b) {
  require_same_shape(a, b, "hadamard");
  return tape_of(a).record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    if (t.needs_grad(a)) t.accumulate_expr(a, g.cwiseProduct(b.value()));
    if (t.needs_grad(b)) t.accumulate_expr(b, g.cwiseProduct(a.value()));
  });
}

Var divide(const Var& a, const Var& b) {
  require_same_shape(a, b, "divide");
  Matrix out = a.value().cwiseQuotient(b.value());
  return tape_of(a).record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    if (t.needs_grad(a)) t.accumulate_expr(a, g.cwiseQuotient(b.value()));
    if (t.needs_grad(b)) {
      t.accumulate_expr(b, -(g.array() * a.value().array() / b.value().array().square()).matrix());
    }
  });
}

Var scale(const Var& a, double c) {
  return tape_of(a).record(c * a.value(), {a}, [a, c](Tape& t, const Matrix& g, const Matrix& /*y*/) { t.accumulate_expr(a, c * g); });
}

Var add_scalar(const Var& a, double c) {
  return tape_of(a).record((a.value().array() + c).matrix(), {a},
                           [a](Tape& t, const Matrix& g, const Matrix& /*y*/) { t.accumulate(a, g); });
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matmul: inner dimensions differ");
  return tape_of(a).record(a.value() * b.value(), {a, b}, [a, b](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    if (t.needs_grad(a)) t.accumulate_expr(a, g * b.value().transpose());
    if (t.needs_grad(b)) t.accumulate_expr(b, a.value().transpose() * g);
  });
}

Var matmul_tn(const Var& a, const Var& b) {
  if (a.rows() != b.rows()) throw InvalidArgument("matmul_tn: row counts differ");
  return tape_of(a).record(a.value().transpose() * b.value(), {a, b}, [a, b](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    if (t.needs_grad(a)) t.accumulate_expr(a, b.value() * g.transpose());
    if (t.needs_grad(b)) t.accumulate_expr(b, a.value() * g);
  });
}

Var transpose(const Var& a) {
  return tape_of(a).record(a.value().transpose(), {a},
                           [a](Tape& t, const Matrix& g, const Matrix& /*y*/) { t.accumulate_expr(a, g.transpose()); });
}

Var exp(const Var& a) {
  return tape_of(a).record(a.value().array().exp().matrix(), {a}, [a](Tape& t, const Matrix& g, const Matrix& y) {
    t.accumulate_expr(a, g.cwiseProduct(y));
  });
}

Var log(const Var& a) {
  return tape_of(a).record(a.value().array().log().matrix(), {a}, [a](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    t.accumulate_expr(a, g.cwiseQuotient(a.value()));
  });
}

namespace {
double softplus_scalar(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Var softplus(const Var& a) {
  return tape_of(a).record(a.value().unaryExpr(&softplus_scalar), {a}, [a](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    t.accumulate_expr(a, g.cwiseProduct(a.value().unaryExpr(&sigmoid_scalar)));
  });
}

Var tanh(const Var& a) {
  Matrix out = a.value().array().tanh().matrix();
  Matrix deriv = (1.0 - out.array().square()).matrix();
  return tape_of(a).record(std::move(out), {a}, [a, deriv = std::move(deriv)](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    t.accumulate_expr(a, g.cwiseProduct(deriv));
  });
}

Var square(const Var& a) {
  return tape_of(a).record(a.value().array().square().matrix(), {a}, [a](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    t.accumulate_expr(a, 2.0 * g.cwiseProduct(a.value()));
  });
}

Var clamp_min(const Var& a, double lo) {
  return tape_of(a).record(a.value().cwiseMax(lo), {a}, [a, lo](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    t.accumulate_expr(a, (a.value().array() >= lo).select(g, 0.0).matrix());
  });
}

// ---- reductions and broadcasting -------------------------------------------

Var sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    t.accumulate_expr(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var col_sums(const Var& a) {
  return tape_of(a).record(a.value().colwise().sum(), {a}, [a](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    t.accumulate_expr(a, g.replicate(a.rows(), 1));
  });
}

Var row_sums(const Var& a) {
  return tape_of(a).record(a.value().rowwise().sum(), {a}, [a](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    t.accumulate_expr(a, g.replicate(1, a.cols()));
  });
}

Var broadcast_row(const Var& row, Index rows) {
  if (row.rows() != 1) throw InvalidArgument("broadcast_row: input must be a row");
  return tape_of(row).record(row.value().replicate(rows, 1), {row}, [row](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    t.accumulate_expr(row, g.colwise().sum());
  });
}

Var broadcast_col(const Var& col, Index cols) {
  if (col.cols() != 1) throw InvalidArgument("broadcast_col: input must be a column");
  return tape_of(col).record(col.value().replicate(1, cols), {col}, [col](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    t.accumulate_expr(col, g.rowwise().sum());
  });
}

Var broadcast_scalar(const Var& s, Index rows, Index cols) {
  const double v = s.scalar();
  return tape_of(s).record(Matrix::Constant(rows, cols, v), {s}, [s](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    Matrix out(1, 1);
    out(0, 0) = g.sum();
    t.accumulate(s, out);
  });
}

Var gather_rows(const Var& a, std::span<const Index> rows) {
  std::vector<Index> idx(rows.begin(), rows.end());
  Matrix out(static_cast<Index>(idx.size()), a.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= a.rows()) throw InvalidArgument("gather_rows: index out of range");
    out.row(static_cast<Index>(i)) = a.value().row(idx[i]);
  }
  return tape_of(a).record(std::move(out), {a}, [a, idx = std::move(idx)](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) full.row(idx[i]) += g.row(static_cast<Index>(i));
    t.accumulate(a, full);
  });
}

Var vstack(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidArgument("vstack: no inputs");
  Index rows = 0;
  const Index cols = parts.front().cols();
  for (const Var& p : parts) {
    if (p.cols() != cols) throw InvalidArgument("vstack: column counts differ");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Index r = 0;
  for (const Var& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape_of(parts.front()).record(std::move(out), parts, [inputs](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    Index r0 = 0;
    for (const Var& p : inputs) {
      if (t.needs_grad(p)) t.accumulate_expr(p, g.middleRows(r0, p.rows()));
      r0 += p.rows();
    }
  });
}

Var slice_cols(const Var& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw InvalidArgument("slice_cols: range out of bounds");
  return tape_of(a).record(a.value().middleCols(start, count), {a}, [a, start, count](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    full.middleCols(start, count) = g;
    t.accumulate(a, full);
  });
}

// ---- linear algebra --------------------------------------------------------

Var cholesky(const Var& a, double base_jitter) {
  CholeskyFactor f = cholesky_with_jitter(a.value(), base_jitter);
  return tape_of(a).record(std::move(f.lower), {a}, [a](Tape& t, const Matrix& lbar, const Matrix& y) {
    // dL = L Phi(L^{-1} dA L^{-T}); adjoint A = L^{-T} Phi(L^T Lbar) L^{-1}
    const Matrix& lv = y;
    Matrix p = lv.transpose() * lbar;
    p = p.triangularView<Eigen::Lower>();
    p.diagonal() *= 0.5;
    const auto tri = lv.triangularView<Eigen::Lower>();
    tri.transpose().solveInPlace(p);                       // L^{-T} P
    Matrix abar = tri.transpose().solve(p.transpose()).transpose();  // (L^{-T} P) L^{-1}
    t.accumulate_expr(a, 0.5 * (abar + abar.transpose()));
  });
}

Var tri_solve(const Var& l, const Var& b) {
  if (l.rows() != l.cols() || l.rows() != b.rows()) throw InvalidArgument("tri_solve: shape mismatch");
  Matrix x = l.value().triangularView<Eigen::Lower>().solve(b.value());
  return tape_of(l).record(std::move(x), {l, b}, [l, b](Tape& t, const Matrix& g, const Matrix& y) {
    Matrix bbar = l.value().triangularView<Eigen::Lower>().transpose().solve(g);
    if (t.needs_grad(l)) {
      Matrix lbar = -(bbar * y.transpose());
      t.accumulate_expr(l, lbar.triangularView<Eigen::Lower>().toDenseMatrix());
    }
    if (t.needs_grad(b)) t.accumulate(b, bbar);
  });
}

// ---- fused kernels ---------------------------------------------------------

Var ard_gram(const Var& a, const Var& b, const Var& variance, const Var& alpha) {
  const Index q = alpha.cols();
  if (alpha.rows() != 1 || a.cols() != q || b.cols() != q || variance.value().size() != 1) {
    throw InvalidArgument("ard_gram: shape mismatch");
  }
  const double v = variance.scalar();
  Matrix k = v * (-0.5 * ard_sqdist(a.value(), b.value(), alpha.value())).array().exp();
  return tape_of(a).record(std::move(k), {a, b, variance, alpha}, [a, b, variance, alpha](Tape& t, const Matrix& g, const Matrix& y) {
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    const Matrix gk = g.cwiseProduct(y);
    const Vector rs = gk.rowwise().sum();
    const RowVector cs = gk.colwise().sum();
    const RowVector al = alpha.value();
    if (t.needs_grad(variance)) {
      Matrix vb(1, 1);
      vb(0, 0) = gk.sum() / variance.scalar();
      t.accumulate(variance, vb);
    }
    Matrix gb;  // G b, P x Q
    Matrix gta;  // G^T a, R x Q
    if (t.needs_grad(a) || t.needs_grad(alpha)) gb = gk * bv;
    if (t.needs_grad(b)) gta = gk.transpose() * av;
    if (t.needs_grad(a)) {
      Matrix abar = -((av.array().colwise() * rs.array()) - gb.array()).matrix();
      abar.array().rowwise() *= al.array();
      t.accumulate(a, abar);
    }
    if (t.needs_grad(b)) {
      Matrix bbar = (gta.array() - (bv.array().colwise() * cs.transpose().array())).matrix();
      bbar.array().rowwise() *= al.array();
      t.accumulate(b, bbar);
    }
    if (t.needs_grad(alpha)) {
      RowVector term = (av.array().square().colwise() * rs.array()).colwise().sum().matrix();
      term += (bv.array().square().colwise() * cs.transpose().array()).colwise().sum().matrix();
      term -= 2.0 * (av.array() * gb.array()).colwise().sum().matrix();
      t.accumulate_expr(alpha, -0.5 * term);
    }
  });
}

Var block_tril_expdiag(const Var& raw, Index block) {
  const Index m = block;
  if (m <= 0 || raw.rows() != m || raw.cols() % m != 0) throw InvalidArgument("block_tril_expdiag: bad shape");
  const Index c = raw.cols() / m;
  Matrix w = Matrix::Zero(m, raw.cols());
  for (Index k = 0; k < c; ++k) {
    auto src = raw.value().middleCols(k * m, m);
    auto dst = w.middleCols(k * m, m);
    dst.triangularView<Eigen::StrictlyLower>() = src;
    dst.diagonal() = src.diagonal().array().exp();
  }
  return tape_of(raw).record(std::move(w), {raw}, [raw, m, c](Tape& t, const Matrix& g, const Matrix& y) {
    Matrix gr = Matrix::Zero(m, m * c);
    for (Index k = 0; k < c; ++k) {
      auto dst = gr.middleCols(k * m, m);
      dst.triangularView<Eigen::StrictlyLower>() = g.middleCols(k * m, m);
      dst.diagonal() = g.middleCols(k * m, m).diagonal().cwiseProduct(y.middleCols(k * m, m).diagonal());
    }
    t.accumulate(raw, std::move(gr));
  });
}

Var quad_form_cols(const Var& a, const Var& w) {
  const Index m = a.rows();
  if (w.rows() != m || w.cols() % m != 0) throw InvalidArgument("quad_form_cols: bad shape");
  const Index c = w.cols() / m;
  const Index nb = a.cols();
  Matrix out(nb, c);
  for (Index k = 0; k < c; ++k) {
    Matrix v = w.value().middleCols(k * m, m).transpose() * a.value();
    out.col(k) = v.colwise().squaredNorm().transpose();
  }
  return tape_of(a).record(std::move(out), {a, w}, [a, w, m, c](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    const bool ga = t.needs_grad(a);
    const bool gw = t.needs_grad(w);
    Matrix abar = ga ? Matrix::Zero(a.rows(), a.cols()) : Matrix();
    Matrix wbar = gw ? Matrix::Zero(m, m * c) : Matrix();
    for (Index k = 0; k < c; ++k) {
      const auto wk = w.value().middleCols(k * m, m);
      Matrix v = wk.transpose() * a.value();               // M x B
      v.array().rowwise() *= g.col(k).transpose().array();  // scale columns by g_bk
      if (ga) abar.noalias() += 2.0 * wk * v;
      if (gw) wbar.middleCols(k * m, m).noalias() = 2.0 * a.value() * v.transpose();
    }
    if (ga) t.accumulate(a, abar);
    if (gw) t.accumulate(w, wbar);
  });
}

namespace {

Matrix tril_block(const Matrix& raw, Index k, Index m) {
  Matrix w = raw.middleCols(k * m, m).triangularView<Eigen::StrictlyLower>();
  w.diagonal() = raw.middleCols(k * m, m).diagonal().array().exp();
  return w;
}

}  // namespace

Var weighted_tril_gram(const Var& raw, const Var& weights) {
  const Index m = raw.rows();
  if (m == 0 || raw.cols() % m != 0 || weights.rows() != 1 || weights.cols() != raw.cols() / m) {
    throw InvalidArgument("weighted_tril_gram: bad shape");
  }
  const Index c = raw.cols() / m;
  Matrix s = Matrix::Zero(m, m);
  for (Index k = 0; k < c; ++k) {
    const Matrix wk = tril_block(raw.value(), k, m);
    s.noalias() += weights.value()(0, k) * (wk * wk.transpose());
  }
  return tape_of(raw).record(std::move(s), {raw, weights}, [raw, weights, m, c](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    const Matrix gs = g + g.transpose();
    const bool gr = t.needs_grad(raw);
    const bool gwt = t.needs_grad(weights);
    Matrix rbar = gr ? Matrix(m, m * c) : Matrix();
    Matrix wtbar = gwt ? Matrix(1, c) : Matrix();
    Matrix gwk(m, m);
    for (Index k = 0; k < c; ++k) {
      const Matrix wk = tril_block(raw.value(), k, m);
      gwk.noalias() = gs * wk.triangularView<Eigen::Lower>();
      if (gwt) wtbar(0, k) = 0.5 * (wk.array() * gwk.array()).sum();
      if (gr) {
        auto dst = rbar.middleCols(k * m, m);
        dst.triangularView<Eigen::StrictlyUpper>().setZero();
        dst.triangularView<Eigen::StrictlyLower>() = weights.value()(0, k) * gwk;
        dst.diagonal() = weights.value()(0, k) * gwk.diagonal().cwiseProduct(wk.diagonal());
      }
    }
    if (gr) t.accumulate(raw, std::move(rbar));
    if (gwt) t.accumulate(weights, wtbar);
  });
}

Var tril_frobenius_logdet(const Var& raw) {
  const Index m = raw.rows();
  if (m == 0 || raw.cols() % m != 0) throw InvalidArgument("tril_frobenius_logdet: bad shape");
  const Index c = raw.cols() / m;
  double total = 0.0;
  for (Index k = 0; k < c; ++k) {
    const auto blk = raw.value().middleCols(k * m, m);
    total += blk.triangularView<Eigen::StrictlyLower>().toDenseMatrix().squaredNorm();
    const auto d = blk.diagonal().array();
    total += ((2.0 * d).exp() - 2.0 * d).sum();
  }
  return tape_of(raw).record(Matrix::Constant(1, 1, total), {raw}, [raw, m, c](Tape& t, const Matrix& g, const Matrix& /*y*/) {
    const double s = g(0, 0);
    Matrix rbar = Matrix::Zero(m, m * c);
    for (Index k = 0; k < c; ++k) {
      const auto blk = raw.value().middleCols(k * m, m);
      auto dst = rbar.middleCols(k * m, m);
      dst.triangularView<Eigen::StrictlyLower>() = 2.0 * s * blk;
      dst.diagonal() = 2.0 * s * (blk.diagonal().array() * 2.0).exp().matrix() - Vector::Constant(m, 2.0 * s);
    }
    t.accumulate(raw, std::move(rbar));
  });
}

Var probit_expected_log_lik(const Var& mean, const Var& var, const Matrix& sign, const QuadratureRule& rule) {
  require_same_shape(mean, var, "probit_expected_log_lik");
  if (sign.rows() != mean.rows() || sign.cols() != mean.cols()) {
    throw InvalidArgument("probit_expected_log_lik: sign shape mismatch");
  }
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  const Index r = mean.rows();
  const Index c = mean.cols();
  const int order = rule.order();
  Matrix out(r, c);
  Matrix dmean(r, c);
  Matrix dvar(r, c);
  for (Index j = 0; j < c; ++j) {
    for (Index i = 0; i < r; ++i) {
      const double mu = mean.value()(i, j);
      const double v = var.value()(i, j);
      const double s = sign(i, j);
      const double root = std::sqrt(2.0 * v);
      double val = 0.0, dm = 0.0, dv = 0.0;
      if (order % 2 == 1) {
        const int l = order / 2;
        val = rule.weights[l] * log_normal_cdf(s * mu);
        dm = s * inverse_mills_ratio(s * mu) * rule.weights[l];
      }
      for (int l = 0; l < order / 2; ++l) {
        const double z = rule.nodes[l];
        const double a0 = s * (z * root + mu);
        const double a1 = s * (rule.nodes[order - 1 - l] * root + mu);
        val += rule.weights[l] * (log_normal_cdf(a0) + log_normal_cdf(a1));
        const double r0 = s * inverse_mills_ratio(a0);
        const double r1 = s * inverse_mills_ratio(a1);
        dm += rule.weights[l] * (r0 + r1);
        dv += rule.weights[l] * z * (r0 - r1);
      }
      out(i, j) = inv_sqrt_pi * val;
      dmean(i, j) = inv_sqrt_pi * dm;
      dvar(i, j) = root > 0.0 ? inv_sqrt_pi * dv / root : 0.0;
    }
  }
  return tape_of(mean).record(std::move(out), {mean, var},
                              [mean, var, dmean = std::move(dmean), dvar = std::move(dvar)](Tape& t, const Matrix& g, const Matrix& /*y*/) {
                                t.accumulate_expr(mean, g.cwiseProduct(dmean));
                                t.accumulate_expr(var, g.cwiseProduct(dvar));
                              });
}

}  // namespace ldgd::ad
