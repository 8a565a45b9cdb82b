#include "ldgd/checkpoint.hpp"

#include <fstream>

namespace ldgd {

using nlohmann::json;

Matrix Checkpoint::preprocess(const Matrix& raw) const {
  if (raw.cols() != raw_dims) {
    throw ValidationError("data has " + std::to_string(raw.cols()) + " feature columns, checkpoint expects " +
                          std::to_string(raw_dims));
  }
  return standardizer.transform(select_columns(raw, feature_columns));
}

Matrix Checkpoint::postprocess(const Matrix& model_space) const { return standardizer.inverse(model_space); }

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  try {
    const Index r = j.at("rows").get<Index>();
    const Index c = j.at("cols").get<Index>();
    const json& data = j.at("data");
    if (r < 0 || c < 0 || static_cast<Index>(data.size()) != r) throw ValidationError(what + ": row count mismatch");
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
      const json& row = data.at(static_cast<std::size_t>(i));
      if (static_cast<Index>(row.size()) != c) throw ValidationError(what + ": column count mismatch");
      for (Index k = 0; k < c; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

json to_json(const ElboReport& r) {
  return json{{"ell_reg", r.ell_reg}, {"ell_cls", r.ell_cls}, {"kl_x", r.kl_x}, {"kl_u_reg", r.kl_u_reg},
              {"kl_u_cls", r.kl_u_cls}, {"elbo", r.elbo}, {"iteration", r.iteration}};
}

ElboReport elbo_report_from_json(const json& j) {
  ElboReport r;
  r.ell_reg = j.at("ell_reg").get<double>();
  r.ell_cls = j.at("ell_cls").get<double>();
  r.kl_x = j.at("kl_x").get<double>();
  r.kl_u_reg = j.at("kl_u_reg").get<double>();
  r.kl_u_cls = j.at("kl_u_cls").get<double>();
  r.elbo = j.at("elbo").get<double>();
  r.iteration = j.at("iteration").get<long>();
  return r;
}

json to_json(const ModelConfig& c) {
  return json{{"kind", to_string(c.kind)},
              {"Q", c.latent_dims},
              {"M_r", c.inducing_reg},
              {"M_c", c.inducing_cls},
              {"quadrature_order", c.quadrature_order},
              {"J", c.samples},
              {"jitter", c.jitter},
              {"latent_init", to_string(c.latent_init)},
              {"inducing_init", to_string(c.inducing_init)},
              {"encoder_hidden", c.encoder_hidden},
              {"alpha_init", c.alpha_init},
              {"initial_scale", c.initial_scale},
              {"noise_floor", c.noise_floor},
              {"include_classification", c.include_classification}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.kind = latent_kind_from_string(j.at("kind").get<std::string>());
  c.latent_dims = j.at("Q").get<Index>();
  c.inducing_reg = j.at("M_r").get<Index>();
  c.inducing_cls = j.at("M_c").get<Index>();
  c.quadrature_order = j.at("quadrature_order").get<int>();
  c.samples = j.at("J").get<int>();
  c.jitter = j.at("jitter").get<double>();
  c.latent_init = latent_init_from_string(j.at("latent_init").get<std::string>());
  c.inducing_init = inducing_init_from_string(j.at("inducing_init").get<std::string>());
  c.encoder_hidden = j.at("encoder_hidden").get<std::vector<Index>>();
  c.alpha_init = j.at("alpha_init").get<double>();
  c.initial_scale = j.at("initial_scale").get<double>();
  c.noise_floor = j.at("noise_floor").get<double>();
  c.include_classification = j.at("include_classification").get<bool>();
  return c;
}

json checkpoint_to_json(const Checkpoint& c) {
  const LdgdModel& m = c.model;
  json blocks = json::array();
  for (const auto& b : m.params().blocks()) {
    blocks.push_back(json{{"name", b.name}, {"transform", to_string(b.transform)}, {"storage", matrix_to_json(m.params().raw(b.name))}});
  }
  json j{{"format_version", kCheckpointFormatVersion},
         {"Q", m.q()},
         {"D", m.d()},
         {"K", m.k()},
         {"N", m.n()},
         {"M_r", m.config().inducing_reg},
         {"M_c", m.config().inducing_cls},
         {"model_config", to_json(m.config())},
         {"parameters", std::move(blocks)},
         {"preprocessing",
          {{"raw_dims", c.raw_dims},
           {"feature_columns", c.feature_columns},
           {"mean", matrix_to_json(c.standardizer.mean)},
           {"scale", matrix_to_json(c.standardizer.scale)}}},
         {"label_names", c.label_names},
         {"feature_names", c.feature_names},
         {"split", {{"train", c.train_rows}, {"test", c.test_rows}}},
         {"final_report", to_json(c.final_report)},
         {"report_seed", c.report_seed},
         {"report_samples", c.report_samples},
         {"config", c.config_echo}};
  if (m.ppca) {
    j["ppca"] = json{{"loadings", matrix_to_json(m.ppca->loadings)},
                     {"noise", m.ppca->noise},
                     {"mean", matrix_to_json(m.ppca->mean)},
                     {"column_scale", matrix_to_json(m.ppca_column_scale)}};
  }
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw ValidationError("unsupported checkpoint format_version " + std::to_string(version));
    }
    const ModelConfig cfg = model_config_from_json(j.at("model_config"));
    ParameterVector params;
    for (const json& b : j.at("parameters")) {
      const std::string name = b.at("name").get<std::string>();
      params.add_raw(name, matrix_from_json(b.at("storage"), name), transform_from_string(b.at("transform").get<std::string>()));
    }
    LdgdModel model(cfg, j.at("N").get<Index>(), j.at("D").get<Index>(), j.at("K").get<Index>(), std::move(params));
    if (model.q() != j.at("Q").get<Index>()) throw ValidationError("checkpoint Q disagrees with model_config");
    if (j.contains("ppca")) {
      const json& p = j.at("ppca");
      PpcaModel ppca;
      ppca.loadings = matrix_from_json(p.at("loadings"), "ppca.loadings");
      ppca.noise = p.at("noise").get<double>();
      ppca.mean = matrix_from_json(p.at("mean"), "ppca.mean").row(0);
      model.ppca = std::move(ppca);
      model.ppca_column_scale = matrix_from_json(p.at("column_scale"), "ppca.column_scale").row(0);
    }
    const json& pre = j.at("preprocessing");
    Checkpoint c{std::move(model)};
    c.raw_dims = pre.at("raw_dims").get<Index>();
    c.feature_columns = pre.at("feature_columns").get<std::vector<Index>>();
    c.standardizer.mean = matrix_from_json(pre.at("mean"), "preprocessing.mean").row(0);
    c.standardizer.scale = matrix_from_json(pre.at("scale"), "preprocessing.scale").row(0);
    c.label_names = j.at("label_names").get<std::vector<std::string>>();
    c.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    c.train_rows = j.at("split").at("train").get<std::vector<Index>>();
    c.test_rows = j.at("split").at("test").get<std::vector<Index>>();
    c.final_report = elbo_report_from_json(j.at("final_report"));
    c.report_seed = j.at("report_seed").get<std::uint64_t>();
    c.report_samples = j.at("report_samples").get<int>();
    c.config_echo = j.at("config");
    if (static_cast<Index>(c.feature_columns.size()) != c.model.d()) {
      throw ValidationError("checkpoint feature column count disagrees with D");
    }
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ValidationError(std::string("inconsistent checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << checkpoint_to_json(c).dump(1) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace ldgd
