#pragma once

// Reverse-mode differentiation over matrix-valued nodes.
//
// A Tape records every intermediate matrix together with a closure that
// pushes the output adjoint back to its inputs. Nodes that do not depend on
// any variable are recorded without a closure, so constant sub-expressions
// cost nothing in the backward sweep.

#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "ldgd/numerics.hpp"

namespace ldgd::ad {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while its tape lives.
class Var {
 public:
  Var() = default;

  [[nodiscard]] const Matrix& value() const;
  [[nodiscard]] Index rows() const { return value().rows(); }
  [[nodiscard]] Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  [[nodiscard]] double scalar() const;
  [[nodiscard]] int id() const { return id_; }
  [[nodiscard]] Tape* tape() const { return tape_; }
  [[nodiscard]] bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  /// Receives the node's accumulated adjoint and its own forward value.
  using Backward = std::function<void(Tape&, const Matrix& out_grad, const Matrix& out_value)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that receives a gradient.
  Var variable(Matrix value);
  /// Leaf that never receives a gradient.
  Var constant(Matrix value);
  /// Interior node. The closure is kept only if some input needs a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Matrix value, std::span<const Var> inputs, Backward backward);

  /// Seeds d(output)/d(output) = 1 (output must be 1x1) and sweeps backwards.
  void backward(const Var& output);

  [[nodiscard]] bool needs_grad(const Var& v) const { return nodes_[v.id_].needs_grad; }
  /// Gradient accumulated at v; a zero matrix if nothing reached it.
  [[nodiscard]] Matrix grad(const Var& v) const;
  /// The accumulated adjoint without a copy; nullptr if nothing reached v.
  [[nodiscard]] const Matrix* grad_if_any(const Var& v) const;
  [[nodiscard]] const Matrix& value(const Var& v) const { return nodes_[v.id_].value; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  /// Adds g into v's adjoint. No-op when v does not need a gradient.
  void accumulate(const Var& v, const Matrix& g);
  void accumulate(const Var& v, Matrix&& g);
  template <typename Expr>
  void accumulate_expr(const Var& v, const Expr& g) {
    auto& node = nodes_[v.id_];
    if (!node.needs_grad) return;
    if (!node.has_grad) {
      node.grad = g;
      node.has_grad = true;
    } else {
      node.grad += g;
    }
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    bool has_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// ---- elementwise and structural primitives ---------------------------------

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
Var divide(const Var& a, const Var& b);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);
Var matmul(const Var& a, const Var& b);
/// a^T b without materializing the transpose.
Var matmul_tn(const Var& a, const Var& b);
Var transpose(const Var& a);

Var exp(const Var& a);
Var log(const Var& a);
Var softplus(const Var& a);
Var tanh(const Var& a);
Var square(const Var& a);
Var clamp_min(const Var& a, double lo);

Var sum(const Var& a);
/// 1 x cols
Var col_sums(const Var& a);
/// rows x 1
Var row_sums(const Var& a);

Var broadcast_row(const Var& row, Index rows);
Var broadcast_col(const Var& col, Index cols);
Var broadcast_scalar(const Var& s, Index rows, Index cols);

Var gather_rows(const Var& a, std::span<const Index> rows);
Var vstack(std::span<const Var> parts);
Var slice_cols(const Var& a, Index start, Index count);

// ---- linear algebra --------------------------------------------------------

/// Lower Cholesky factor of a (jitter ladder of cholesky_with_jitter); the
/// jitter actually used is treated as a constant.
Var cholesky(const Var& a, double base_jitter);
/// l^{-1} b for lower-triangular l.
Var tri_solve(const Var& l, const Var& b);

// ---- model-specific fused primitives ---------------------------------------

/// ARD squared-exponential cross-covariance:
/// out(i,j) = variance * exp(-1/2 sum_q alpha_q (a_iq - b_jq)^2).
/// variance is 1x1, alpha is 1xQ.
Var ard_gram(const Var& a, const Var& b, const Var& variance, const Var& alpha);

/// raw is M x (M*C): C square blocks. Each block becomes lower triangular
/// with its diagonal exponentiated and its upper triangle zeroed.
Var block_tril_expdiag(const Var& raw, Index block);
/// out(b,c) = || W_c^T a_{:,b} ||^2 for a (M x B) and blocks W_c (M x M).
Var quad_form_cols(const Var& a, const Var& w);
/// sum_c weights_c W_c W_c^T for weights 1 x C, with W_c the blocks of
/// block_tril_expdiag(raw). Works on raw directly.
Var weighted_tril_gram(const Var& raw, const Var& weights);
/// sum_c ||W_c||_F^2 - 2 sum_c log det W_c for the same blocks (1 x 1).
Var tril_frobenius_logdet(const Var& raw);

/// Gauss-Hermite expected log-probit:
/// out = (1/sqrt(pi)) sum_l w_l log Phi(sign * (z_l sqrt(2 var) + mean)),
/// elementwise; sign is a constant matrix of +-1.
Var probit_expected_log_lik(const Var& mean, const Var& var, const Matrix& sign, const QuadratureRule& rule);

}  // namespace ldgd::ad
