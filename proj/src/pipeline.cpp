#include "ldgd/pipeline.hpp"

namespace ldgd {

namespace {

Dataset to_model_space(const Checkpoint& c, const Dataset& raw, const std::vector<Index>& rows) {
  Dataset d = raw.subset(rows);
  d.yr = c.preprocess(d.yr);
  d.feature_names.clear();
  for (Index j : c.feature_columns) d.feature_names.push_back(raw.feature_names[static_cast<std::size_t>(j)]);
  return d;
}

}  // namespace

Checkpoint fit_checkpoint(const Dataset& raw, const std::vector<Index>& train_rows, const std::vector<Index>& test_rows,
                          const PipelineOptions& options, TrainResult* trace) {
  if (train_rows.empty()) throw ValidationError("no training rows");
  const Dataset train_raw = raw.subset(train_rows);
  std::vector<Index> columns;
  if (options.drop_constant) {
    columns = varying_columns(train_raw.yr);
  } else {
    for (Index j = 0; j < raw.d(); ++j) columns.push_back(j);
  }
  if (columns.empty()) throw ValidationError("every feature column is constant on the training rows");
  const Matrix selected = select_columns(train_raw.yr, columns);
  const Standardizer st = options.standardize ? Standardizer::fit(selected) : Standardizer::identity(selected.cols());

  Dataset train = train_raw;
  train.yr = st.transform(selected);
  LdgdModel model = LdgdModel::initialize(train, options.model, options.train.seed);
  TrainResult result = model.train(train, options.train);

  Checkpoint c(std::move(model));
  c.standardizer = st;
  c.feature_columns = columns;
  c.raw_dims = raw.d();
  c.label_names = raw.label_names;
  c.feature_names = raw.feature_names;
  c.train_rows = train_rows;
  c.test_rows = test_rows;
  c.final_report = result.final_report;
  c.report_seed = options.train.seed;
  c.report_samples = options.train.report_samples;
  if (trace != nullptr) *trace = std::move(result);
  return c;
}

Dataset training_data(const Checkpoint& checkpoint, const Dataset& raw) {
  return to_model_space(checkpoint, raw, checkpoint.train_rows);
}

Evaluation evaluate_rows(const Checkpoint& checkpoint, const Dataset& raw, const std::vector<Index>& rows,
                         const TestConfig& config) {
  const Dataset test = to_model_space(checkpoint, raw, rows);
  if (checkpoint.model.config().include_classification && test.k() != checkpoint.model.k()) {
    throw ValidationError("data has " + std::to_string(test.k()) + " classes, checkpoint expects " +
                          std::to_string(checkpoint.model.k()));
  }
  Evaluation e;
  e.inference = checkpoint.model.infer_test_latent(test.yr, config);
  e.decoded = checkpoint.model.decode_labels(e.inference.latent.mean);
  e.truth = test.labels();
  e.metrics = metrics(e.decoded.labels, e.truth, checkpoint.model.k());
  return e;
}

}  // namespace ldgd
