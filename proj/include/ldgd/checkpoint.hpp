#pragma once

#include <filesystem>
#include <optional>

#include "json.hpp"
#include "ldgd/model.hpp"

namespace ldgd {

inline constexpr int kCheckpointFormatVersion = 1;

/// A trained model plus everything needed to reapply it to raw data.
struct Checkpoint {
  explicit Checkpoint(LdgdModel m) : model(std::move(m)) {}

  LdgdModel model;
  Standardizer standardizer;          // applied after column selection
  std::vector<Index> feature_columns;  // raw columns kept, in order
  Index raw_dims = 0;
  std::vector<std::string> label_names;
  std::vector<std::string> feature_names;
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
  ElboReport final_report;
  std::uint64_t report_seed = 0;
  int report_samples = 16;
  nlohmann::json config_echo = nlohmann::json::object();

  /// Raw feature rows -> model space.
  [[nodiscard]] Matrix preprocess(const Matrix& raw) const;
  /// Model space -> raw units over the kept columns.
  [[nodiscard]] Matrix postprocess(const Matrix& model_space) const;
};

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& what);

nlohmann::json to_json(const ElboReport& r);
ElboReport elbo_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
/// Throws IoError if unreadable, ValidationError if malformed.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ldgd
