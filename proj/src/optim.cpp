#include "ldgd/optim.hpp"

#include <cmath>
#include <sstream>

namespace ldgd {

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::identity: return "identity";
    case Transform::log: return "log";
    case Transform::softplus: return "softplus";
  }
  return "identity";
}

Transform transform_from_string(std::string_view s) {
  if (s == "identity") return Transform::identity;
  if (s == "log") return Transform::log;
  if (s == "softplus") return Transform::softplus;
  throw ValidationError("unknown transform '" + std::string(s) + "'");
}

Matrix apply_transform(Transform t, const Matrix& raw) {
  switch (t) {
    case Transform::identity: return raw;
    case Transform::log: return raw.array().exp().matrix();
    case Transform::softplus:
      return raw.unaryExpr([](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); });
  }
  return raw;
}

Matrix inverse_transform(Transform t, const Matrix& value) {
  switch (t) {
    case Transform::identity: return value;
    case Transform::log:
      if ((value.array() <= 0.0).any()) throw InvalidArgument("log-transformed block needs positive values");
      return value.array().log().matrix();
    case Transform::softplus:
      if ((value.array() <= 0.0).any()) throw InvalidArgument("softplus-transformed block needs positive values");
      return value.unaryExpr([](double v) { return v > 30.0 ? v + std::log1p(-std::exp(-v)) : std::log(std::expm1(v)); });
  }
  return value;
}

void ParameterVector::add(std::string name, const Matrix& value, Transform transform) {
  add_raw(std::move(name), inverse_transform(transform, value), transform);
}

void ParameterVector::add_raw(std::string name, const Matrix& raw, Transform transform) {
  if (by_name_.count(name) != 0) throw InvalidArgument("ParameterVector: duplicate block '" + name + "'");
  ParameterBlock b{name, raw.rows(), raw.cols(), transform, storage_.size()};
  Vector grown(storage_.size() + b.size());
  grown.head(storage_.size()) = storage_;
  grown.tail(b.size()) = Eigen::Map<const Vector>(raw.data(), b.size());
  storage_ = std::move(grown);
  by_name_.emplace(name, blocks_.size());
  blocks_.push_back(std::move(b));
}

bool ParameterVector::contains(std::string_view name) const { return by_name_.find(name) != by_name_.end(); }

const ParameterBlock& ParameterVector::block(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw InvalidArgument("ParameterVector: no block '" + std::string(name) + "'");
  return blocks_[it->second];
}

Matrix ParameterVector::raw(std::string_view name) const {
  const ParameterBlock& b = block(name);
  return Eigen::Map<const Matrix>(storage_.data() + b.offset, b.rows, b.cols);
}

Matrix ParameterVector::value(std::string_view name) const { return apply_transform(block(name).transform, raw(name)); }

void ParameterVector::set_raw(std::string_view name, const Matrix& raw) {
  const ParameterBlock& b = block(name);
  if (raw.rows() != b.rows || raw.cols() != b.cols) {
    throw InvalidArgument("ParameterVector::set_raw: shape mismatch for '" + std::string(name) + "'");
  }
  Eigen::Map<Matrix>(storage_.data() + b.offset, b.rows, b.cols) = raw;
}

void ParameterVector::set_value(std::string_view name, const Matrix& value) {
  set_raw(name, inverse_transform(block(name).transform, value));
}

const ParameterBlock& ParameterVector::block_at(Index i) const {
  for (const auto& b : blocks_) {
    if (i >= b.offset && i < b.offset + b.size()) return b;
  }
  throw InvalidArgument("ParameterVector::block_at: index out of range");
}

BoundParameters::BoundParameters(ad::Tape& tape, const ParameterVector& params, bool trainable)
    : tape_(&tape), params_(&params) {
  for (const auto& b : params.blocks()) {
    Matrix raw = params.raw(b.name);
    ad::Var leaf = trainable ? tape.variable(std::move(raw)) : tape.constant(std::move(raw));
    raw_.push_back(leaf);
    switch (b.transform) {
      case Transform::identity: value_.push_back(leaf); break;
      case Transform::log: value_.push_back(ad::exp(leaf)); break;
      case Transform::softplus: value_.push_back(ad::softplus(leaf)); break;
    }
  }
}

namespace {
std::size_t index_of(const ParameterVector& p, std::string_view name) {
  const auto& blocks = p.blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i].name == name) return i;
  throw InvalidArgument("BoundParameters: no block '" + std::string(name) + "'");
}
}  // namespace

ad::Var BoundParameters::operator[](std::string_view name) const { return value_[index_of(*params_, name)]; }

ad::Var BoundParameters::raw(std::string_view name) const { return raw_[index_of(*params_, name)]; }

Vector BoundParameters::gradient() const {
  Vector g = Vector::Zero(params_->size());
  const auto& blocks = params_->blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (const Matrix* gm = tape_->grad_if_any(raw_[i])) {
      g.segment(blocks[i].offset, blocks[i].size()) = Eigen::Map<const Vector>(gm->data(), gm->size());
    }
  }
  return g;
}

double evaluate(const Objective& objective, const ParameterVector& at) {
  ad::Tape tape;
  BoundParameters bound(tape, at, false);
  return objective(tape, bound).scalar();
}

Vector gradient(const Objective& objective, const ParameterVector& at, double* value) {
  ad::Tape tape;
  BoundParameters bound(tape, at, true);
  ad::Var out = objective(tape, bound);
  const double v = out.scalar();
  if (!std::isfinite(v)) throw NumericalFailure("gradient: objective is not finite");
  tape.backward(out);
  if (value != nullptr) *value = v;
  return bound.gradient();
}

const BlockCheck& GradientCheckReport::block(std::string_view name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw InvalidArgument("GradientCheckReport: no block '" + std::string(name) + "'");
}

GradientCheckReport check_gradient(const Objective& objective, const ParameterVector& at, const Vector& analytic,
                                   const GradientCheckOptions& options) {
  if (analytic.size() != at.size()) throw InvalidArgument("check_gradient: gradient length mismatch");
  GradientCheckReport report;
  ParameterVector work = at;
  for (const auto& b : at.blocks()) {
    BlockCheck bc;
    bc.name = b.name;
    for (Index k = 0; k < b.size(); ++k) {
      const Index i = b.offset + k;
      const double x0 = at.storage()(i);
      work.storage()(i) = x0 + options.step;
      const double fp = evaluate(objective, work);
      work.storage()(i) = x0 - options.step;
      const double fm = evaluate(objective, work);
      work.storage()(i) = x0;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw NumericalFailure("check_gradient: objective not finite while perturbing block '" + b.name + "'");
      }
      const double numeric = (fp - fm) / (2.0 * options.step);
      const double a = analytic(i);
      const double mag = std::max(std::abs(a), std::abs(numeric));
      if (mag <= options.magnitude_floor) continue;
      ++bc.checked;
      const double rel = std::abs(a - numeric) / mag;
      if (rel > bc.max_rel_error) {
        bc.max_rel_error = rel;
        bc.worst_index = k;
        bc.analytic = a;
        bc.numeric = numeric;
      }
    }
    bc.passed = bc.max_rel_error < options.rel_tol;
    report.passed = report.passed && bc.passed;
    report.blocks.push_back(bc);
  }
  return report;
}

AdamState::AdamState(Index size, AdamConfig config)
    : config_(config), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {
  if (!(config.lr > 0.0)) throw InvalidArgument("AdamState: learning rate must be positive");
}

void AdamState::step(Vector& params, const Vector& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw InvalidArgument("AdamState::step: length mismatch");
  }
  if (!grad.allFinite()) throw NumericalFailure("AdamState::step: non-finite gradient");
  ++steps_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  params.array() -= config_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.eps);
}

}  // namespace ldgd
