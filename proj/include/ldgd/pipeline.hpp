#pragma once

#include "ldgd/checkpoint.hpp"

namespace ldgd {

struct PipelineOptions {
  ModelConfig model;
  TrainConfig train;
  bool standardize = true;
  bool drop_constant = false;
};

/// Fits preprocessing on the training rows of raw, trains a model and
/// returns the checkpoint. The training trace is written to *trace when
/// given.
Checkpoint fit_checkpoint(const Dataset& raw, const std::vector<Index>& train_rows, const std::vector<Index>& test_rows,
                          const PipelineOptions& options, TrainResult* trace = nullptr);

struct Evaluation {
  TestInference inference;
  Decoded decoded;
  MetricsReport metrics;
  std::vector<Index> truth;
};

/// Test-time inference and decoding on the given rows of raw data.
Evaluation evaluate_rows(const Checkpoint& checkpoint, const Dataset& raw, const std::vector<Index>& rows,
                         const TestConfig& config);

/// The training rows in model space, ready for ELBO evaluation.
Dataset training_data(const Checkpoint& checkpoint, const Dataset& raw);

}  // namespace ldgd
