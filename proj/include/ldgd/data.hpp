#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ldgd/numerics.hpp"

namespace ldgd {

/// Continuous features plus one-hot labels.
struct Dataset {
  Matrix yr;  // N x D
  Matrix yc;  // N x K, one-hot
  std::vector<std::string> label_names;
  std::vector<std::string> feature_names;

  [[nodiscard]] Index n() const { return yr.rows(); }
  [[nodiscard]] Index d() const { return yr.cols(); }
  [[nodiscard]] Index k() const { return yc.cols(); }
  [[nodiscard]] std::vector<Index> labels() const;
  [[nodiscard]] Dataset subset(std::span<const Index> rows) const;
};

/// Builds a dataset from integer labels in [0, k). Names default to
/// "x0".. and "0"...
Dataset make_dataset(Matrix yr, const std::vector<Index>& labels, Index k,
                     std::vector<std::string> label_names = {}, std::vector<std::string> feature_names = {});

Matrix one_hot(const std::vector<Index>& labels, Index k);
/// Row-wise argmax, ties to the lowest column.
std::vector<Index> argmax_rows(const Matrix& m);

// ---- synthetic moons -------------------------------------------------------

struct MoonsSample {
  Matrix points;  // N x 2
  std::vector<Index> labels;
};

/// Two interleaving half circles: class 0 is (cos t, sin t), class 1 is
/// (1 - cos t, 0.5 - sin t), t evenly spaced on [0, pi]; isotropic noise.
MoonsSample make_moons(Index n, double noise_std, std::uint64_t seed);

/// base * W^T with W a seeded standard-normal target_dim x 2 matrix.
Matrix expand_linear(const Matrix& base, Index target_dim, std::uint64_t seed);
Matrix expand_linear(const Matrix& base, const Matrix& w);

/// Appends base.cols() columns of seeded unit-variance white noise.
Matrix expand_noise_channels(const Matrix& base, std::uint64_t seed);

/// Moons -> linear map to base_dim -> noise doubling: N x 2*base_dim.
Dataset make_synthetic(Index base_dim, Index n, double noise_std, std::uint64_t seed);

// ---- files -----------------------------------------------------------------

/// A CSV cell could not be parsed; row is 1-based over data rows.
class CsvCellError : public ValidationError {
 public:
  CsvCellError(Index row, std::string column, const std::string& what)
      : ValidationError(what), row_(row), column_(std::move(column)) {}
  [[nodiscard]] Index row() const { return row_; }
  [[nodiscard]] const std::string& column() const { return column_; }

 private:
  Index row_;
  std::string column_;
};

/// The requested label column is not in the header.
class UnknownColumnError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Reads a header CSV; lines starting with '#' are skipped. Every column
/// other than label_column must be
/// numeric. The label column is factorized in order of first appearance
/// unless every label is an integer, in which case labels sort numerically.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column);

/// Writes features then a "label" column holding label names. Each comment
/// becomes a leading "# " line.
void write_csv(const std::filesystem::path& path, const Dataset& data, const std::vector<std::string>& comments = {});

class IdxMagicError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class IdxTruncatedError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class IdxCountMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// MNIST-layout IDX images/labels. Pixels scaled to [0, 1]. Keeps the first
/// max_per_digit occurrences of each digit in keep_digits (empty keeps all;
/// max_per_digit <= 0 means no cap). Classes are the kept digits in
/// ascending order.
Dataset load_idx_images(const std::filesystem::path& images, const std::filesystem::path& labels,
                        const std::vector<int>& keep_digits = {}, Index max_per_digit = 0);

// ---- splits ----------------------------------------------------------------

struct Split {
  std::vector<Index> train;
  std::vector<Index> test;
};

/// Stratified: round(test_fraction * class size) of each class go to test.
Split stratified_split(const std::vector<Index>& labels, double test_fraction, std::uint64_t seed);

/// k stratified folds. Returns the k train/test partitions.
std::vector<Split> stratified_kfold(const std::vector<Index>& labels, Index k, std::uint64_t seed);

// ---- preprocessing ---------------------------------------------------------

/// Per-column z-scoring. Constant columns keep scale 1.
struct Standardizer {
  RowVector mean;
  RowVector scale;

  static Standardizer fit(const Matrix& y);
  static Standardizer identity(Index d);
  [[nodiscard]] Matrix transform(const Matrix& y) const;
  [[nodiscard]] Matrix inverse(const Matrix& z) const;
};

/// Column indices whose sample variance exceeds tol.
std::vector<Index> varying_columns(const Matrix& y, double tol = 1e-12);
Matrix select_columns(const Matrix& y, std::span<const Index> cols);

// ---- metrics ---------------------------------------------------------------

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  double f1 = 0.0;         // macro over per-class F1
  Eigen::MatrixXi confusion;  // rows true, cols predicted
  std::vector<double> class_precision;
  std::vector<double> class_recall;
  std::vector<double> class_f1;
  bool zero_division = false;  // some class had an empty denominator
};

MetricsReport metrics(const std::vector<Index>& predicted, const std::vector<Index>& truth, Index k);

}  // namespace ldgd
