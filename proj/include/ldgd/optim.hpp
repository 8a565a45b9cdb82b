#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ldgd/autodiff.hpp"

namespace ldgd {

/// Map from unconstrained storage to the value the model sees.
enum class Transform { identity, log, softplus };

std::string_view to_string(Transform t);
Transform transform_from_string(std::string_view s);

struct ParameterBlock {
  std::string name;
  Index rows = 0;
  Index cols = 0;
  Transform transform = Transform::identity;
  Index offset = 0;

  [[nodiscard]] Index size() const { return rows * cols; }
};

/// Named blocks over one flat vector of unconstrained storage. Blocks are
/// stored column-major in insertion order.
class ParameterVector {
 public:
  /// Adds a block given its constrained value (inverse-transformed to storage).
  void add(std::string name, const Matrix& value, Transform transform = Transform::identity);
  /// Adds a block given its unconstrained storage directly.
  void add_raw(std::string name, const Matrix& raw, Transform transform = Transform::identity);

  [[nodiscard]] bool contains(std::string_view name) const;
  [[nodiscard]] const ParameterBlock& block(std::string_view name) const;
  [[nodiscard]] const std::vector<ParameterBlock>& blocks() const { return blocks_; }

  [[nodiscard]] Matrix raw(std::string_view name) const;
  /// Constrained view (exp / softplus applied).
  [[nodiscard]] Matrix value(std::string_view name) const;
  void set_raw(std::string_view name, const Matrix& raw);
  void set_value(std::string_view name, const Matrix& value);

  [[nodiscard]] const Vector& storage() const { return storage_; }
  Vector& storage() { return storage_; }
  [[nodiscard]] Index size() const { return storage_.size(); }

  /// Name of the block that owns flat coordinate i.
  [[nodiscard]] const ParameterBlock& block_at(Index i) const;

 private:
  std::vector<ParameterBlock> blocks_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  Vector storage_;
};

Matrix apply_transform(Transform t, const Matrix& raw);
Matrix inverse_transform(Transform t, const Matrix& value);

/// A ParameterVector placed on a tape: one leaf per block plus the
/// transformed (constrained) node the objective consumes.
class BoundParameters {
 public:
  /// trainable=false binds every block as a constant.
  BoundParameters(ad::Tape& tape, const ParameterVector& params, bool trainable = true);

  /// Constrained node.
  [[nodiscard]] ad::Var operator[](std::string_view name) const;
  /// Unconstrained leaf.
  [[nodiscard]] ad::Var raw(std::string_view name) const;
  [[nodiscard]] bool contains(std::string_view name) const { return params_->contains(name); }
  [[nodiscard]] const ParameterVector& params() const { return *params_; }

  /// Flat gradient w.r.t. storage, read after tape.backward().
  [[nodiscard]] Vector gradient() const;

 private:
  ad::Tape* tape_;
  const ParameterVector* params_;
  std::vector<ad::Var> raw_;
  std::vector<ad::Var> value_;
};

using Objective = std::function<ad::Var(ad::Tape&, const BoundParameters&)>;

double evaluate(const Objective& objective, const ParameterVector& at);

/// Gradient of the objective w.r.t. unconstrained storage. Throws
/// NumericalFailure when the objective is non-finite.
Vector gradient(const Objective& objective, const ParameterVector& at, double* value = nullptr);

struct BlockCheck {
  std::string name;
  double max_rel_error = 0.0;
  Index worst_index = -1;  // within the block
  double analytic = 0.0;
  double numeric = 0.0;
  Index checked = 0;       // coordinates whose gradient magnitude exceeded the floor
  bool passed = true;
};

struct GradientCheckReport {
  std::vector<BlockCheck> blocks;
  bool passed = true;

  [[nodiscard]] const BlockCheck& block(std::string_view name) const;
};

struct GradientCheckOptions {
  double step = 1e-5;
  double rel_tol = 1e-4;
  double magnitude_floor = 1e-6;
};

/// Compares `analytic` against central differences of the objective on every
/// storage coordinate. Relative error is |a - n| / max(|a|, |n|), checked
/// where max(|a|, |n|) exceeds the floor. A non-finite objective while
/// perturbing throws NumericalFailure naming the block.
GradientCheckReport check_gradient(const Objective& objective, const ParameterVector& at, const Vector& analytic,
                                   const GradientCheckOptions& options = {});

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam moments and step counter for one parameter vector.
class AdamState {
 public:
  AdamState() = default;
  AdamState(Index size, AdamConfig config);

  /// One bias-corrected descent step on `params` given the gradient of the
  /// quantity being minimized.
  void step(Vector& params, const Vector& grad);

  [[nodiscard]] long steps() const { return steps_; }
  [[nodiscard]] const AdamConfig& config() const { return config_; }
  [[nodiscard]] const Vector& first_moment() const { return m_; }
  [[nodiscard]] const Vector& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  Vector m_;
  Vector v_;
  long steps_ = 0;
};

}  // namespace ldgd
