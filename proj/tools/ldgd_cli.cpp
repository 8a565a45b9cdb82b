// ldgd command-line front end.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "ldgd/gradcheck.hpp"
#include "ldgd/kernels.hpp"
#include "ldgd/pipeline.hpp"

#ifndef LDGD_VERSION
#define LDGD_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ldgd;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

struct DataSpec {
  std::string csv;
  std::string label_column = "label";
  std::string idx_images;
  std::string idx_labels;
  std::vector<int> digits;
  Index max_per_digit = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--data", csv, "CSV file with a header row");
    cmd->add_option("--label-column", label_column, "Name of the label column in the CSV")->capture_default_str();
    cmd->add_option("--idx-images", idx_images, "IDX image file (MNIST layout)");
    cmd->add_option("--idx-labels", idx_labels, "IDX label file (MNIST layout)");
    cmd->add_option("--digits", digits, "Digits to keep from the IDX files")->delimiter(',');
    cmd->add_option("--max-per-digit", max_per_digit, "Cap per digit (0 keeps all)");
  }

  [[nodiscard]] Dataset load() const {
    if (!csv.empty()) return load_csv(csv, label_column);
    if (!idx_images.empty() && !idx_labels.empty()) return load_idx_images(idx_images, idx_labels, digits, max_per_digit);
    throw ValidationError("no data given: pass --data or --idx-images with --idx-labels");
  }

  [[nodiscard]] json echo() const {
    json j{{"label_column", label_column}};
    if (!csv.empty()) j["data"] = csv;
    if (!idx_images.empty()) {
      j["idx_images"] = idx_images;
      j["idx_labels"] = idx_labels;
      j["digits"] = digits;
      j["max_per_digit"] = max_per_digit;
    }
    return j;
  }
};

struct Global {
  std::uint64_t seed = 0;
  bool seed_given = false;
};

std::uint64_t resolve_seed(const Global& g) {
  if (g.seed_given) return g.seed;
  if (const char* env = std::getenv("LDGD_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ValidationError(std::string("LDGD_SEED is not an unsigned integer: ") + env);
    }
  }
  return 0;
}

json provenance(const json& config) { return json{{"tool", "ldgd"}, {"version", LDGD_VERSION}, {"config", config}}; }

std::vector<std::string> csv_comments(const json& config) {
  return {std::string("ldgd ") + LDGD_VERSION, "config " + config.dump()};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  return out;
}

std::vector<Index> iota(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

// ---- gen-data --------------------------------------------------------------

struct GenDataOptions {
  std::string kind = "moons-linear";
  Index base_dim = 5;
  Index n = 500;
  double noise = 0.1;
  std::string out;
};

void cmd_gen_data(const GenDataOptions& o, const Global& g) {
  const std::uint64_t seed = resolve_seed(g);
  Dataset data;
  if (o.kind == "moons") {
    MoonsSample m = make_moons(o.n, o.noise, seed);
    data = make_dataset(m.points, m.labels, 2);
  } else if (o.kind == "moons-linear") {
    data = make_synthetic(o.base_dim, o.n, o.noise, seed);
  } else {
    throw ValidationError("unknown --kind '" + o.kind + "' (expected moons or moons-linear)");
  }
  const json config{{"command", "gen-data"}, {"kind", o.kind}, {"base_dim", o.base_dim}, {"n", o.n},
                    {"noise", o.noise}, {"seed", seed}};
  write_csv(o.out, data, csv_comments(config));
  std::cout << "wrote " << o.out << ": N=" << data.n() << " D=" << data.d() << " K=" << data.k() << "\n";
}

// ---- train -----------------------------------------------------------------

struct TrainOptions {
  DataSpec data;
  double test_fraction = 0.2;
  Index folds = 0;
  Index fold = 0;
  std::string model = "ldgd";
  Index q = 2;
  Index m = 25;
  Index m_reg = 0;
  Index m_cls = 0;
  int quadrature = 20;
  int samples = 1;
  double jitter = 1e-6;
  std::string latent_init = "ppca";
  std::string inducing_init = "normal";
  std::vector<Index> encoder_hidden{64, 32};
  double alpha_init = ModelConfig{}.alpha_init;
  double initial_scale = 0.5;
  Index batch_size = 100;
  double lr = 0.01;
  long iters = 1500;
  int report_samples = 16;
  bool no_standardize = false;
  bool drop_constant = false;
  std::string out;
  std::string trace;
};

PipelineOptions pipeline_options(const TrainOptions& o, std::uint64_t seed) {
  PipelineOptions p;
  p.model.kind = latent_kind_from_string(o.model);
  p.model.latent_dims = o.q;
  p.model.inducing_reg = o.m_reg > 0 ? o.m_reg : o.m;
  p.model.inducing_cls = o.m_cls > 0 ? o.m_cls : o.m;
  p.model.quadrature_order = o.quadrature;
  p.model.samples = o.samples;
  p.model.jitter = o.jitter;
  p.model.latent_init = latent_init_from_string(o.latent_init);
  p.model.inducing_init = inducing_init_from_string(o.inducing_init);
  p.model.encoder_hidden = o.encoder_hidden;
  p.model.alpha_init = o.alpha_init;
  p.model.initial_scale = o.initial_scale;
  p.model.validate();
  p.train.batch_size = o.batch_size;
  p.train.lr = o.lr;
  p.train.iters = o.iters;
  p.train.seed = seed;
  p.train.report_samples = o.report_samples;
  if (o.batch_size < 1 || !(o.lr > 0.0) || o.iters < 0 || o.report_samples < 1) {
    throw ValidationError("batch size, lr, iters and report samples must be positive (iters may be 0)");
  }
  p.standardize = !o.no_standardize;
  p.drop_constant = o.drop_constant;
  return p;
}

void cmd_train(const TrainOptions& o, const Global& g) {
  const std::uint64_t seed = resolve_seed(g);
  const PipelineOptions p = pipeline_options(o, seed);
  const Dataset raw = o.data.load();
  Split split;
  if (o.folds > 0) {
    if (o.fold < 0 || o.fold >= o.folds) throw ValidationError("--fold must be in [0, --folds)");
    split = stratified_kfold(raw.labels(), o.folds, seed)[static_cast<std::size_t>(o.fold)];
  } else if (o.test_fraction > 0.0) {
    split = stratified_split(raw.labels(), o.test_fraction, seed);
  } else {
    split.train = iota(raw.n());
  }
  json config{{"command", "train"},
              {"data", o.data.echo()},
              {"seed", seed},
              {"test_fraction", o.test_fraction},
              {"folds", o.folds},
              {"fold", o.fold},
              {"model", to_json(p.model)},
              {"batch_size", o.batch_size},
              {"lr", o.lr},
              {"iters", o.iters},
              {"report_samples", o.report_samples},
              {"standardize", p.standardize},
              {"drop_constant", p.drop_constant}};
  TrainResult result;
  Checkpoint c = [&] {
    try {
      return fit_checkpoint(raw, split.train, split.test, p, &result);
    } catch (const TrainingAborted& e) {
      json trace = json::array();
      for (const auto& r : e.trace()) trace.push_back(to_json(r));
      json doc = provenance(config);
      doc["trace"] = std::move(trace);
      doc["aborted"] = e.what();
      write_json(o.trace.empty() ? o.out + ".trace.json" : o.trace, doc);
      throw;
    }
  }();
  c.config_echo = provenance(config);
  save_checkpoint(o.out, c);
  json trace = json::array();
  for (const auto& r : result.trace) trace.push_back(to_json(r));
  json doc = provenance(config);
  doc["trace"] = std::move(trace);
  doc["final_report"] = to_json(result.final_report);
  const std::string trace_path = o.trace.empty() ? o.out + ".trace.json" : o.trace;
  write_json(trace_path, doc);
  const ElboReport& r = c.final_report;
  std::cout << "trained on " << split.train.size() << " rows (" << split.test.size() << " held out)\n"
            << "final ELBO " << r.elbo << " = ell_reg " << r.ell_reg << " + ell_cls " << r.ell_cls << " - kl_x " << r.kl_x
            << " - kl_u_reg " << r.kl_u_reg << " - kl_u_cls " << r.kl_u_cls << "\n"
            << "checkpoint " << o.out << ", trace " << trace_path << "\n";
}

// ---- predict / evaluate ----------------------------------------------------

struct PredictOptions {
  std::string checkpoint;
  DataSpec data;
  std::string rows = "test";
  double test_lr = 0.01;
  long test_iters = 500;
  bool ppca_init = false;
  int threads = 1;
  std::string out;
  std::string metrics_out;
};

std::vector<Index> select_rows(const Checkpoint& c, const Dataset& raw, const std::string& which) {
  if (which == "all") return iota(raw.n());
  const std::vector<Index>& rows = which == "train" ? c.train_rows : which == "test" ? c.test_rows
                                                                                     : throw ValidationError("--rows must be test, train or all");
  for (Index r : rows)
    if (r >= raw.n()) throw ValidationError("checkpoint split refers to row " + std::to_string(r) + " beyond the data");
  return rows;
}

json metrics_json(const MetricsReport& m) {
  json conf = json::array();
  for (Index i = 0; i < m.confusion.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.confusion.cols(); ++j) row.push_back(m.confusion(i, j));
    conf.push_back(row);
  }
  return json{{"accuracy", m.accuracy},       {"precision", m.precision},         {"recall", m.recall},
              {"f1", m.f1},                   {"class_precision", m.class_precision}, {"class_recall", m.class_recall},
              {"class_f1", m.class_f1},       {"confusion", conf},                 {"zero_division", m.zero_division}};
}

void cmd_predict(const PredictOptions& o, const Global& g, bool with_metrics) {
  const std::uint64_t seed = resolve_seed(g);
  const Checkpoint c = load_checkpoint(o.checkpoint);
  const Dataset raw = o.data.load();
  if (raw.d() != c.raw_dims) {
    throw ValidationError("data has " + std::to_string(raw.d()) + " feature columns, checkpoint expects " +
                          std::to_string(c.raw_dims));
  }
  const std::vector<Index> rows = select_rows(c, raw, o.rows);
  if (rows.empty()) throw ValidationError("no rows selected for prediction");
  TestConfig tc;
  tc.lr = o.test_lr;
  tc.iters = o.test_iters;
  tc.ppca_init = o.ppca_init;
  tc.threads = o.threads;
  tc.seed = seed;
  const Evaluation e = evaluate_rows(c, raw, rows, tc);
  const json config{{"command", with_metrics ? "evaluate" : "predict"}, {"checkpoint", o.checkpoint},
                    {"data", o.data.echo()}, {"rows", o.rows}, {"test_lr", o.test_lr}, {"test_iters", o.test_iters},
                    {"ppca_init", o.ppca_init}, {"threads", o.threads}, {"seed", seed}};

  std::ofstream out = open_out(o.out);
  for (const auto& line : csv_comments(config)) out << "# " << line << '\n';
  out << "row";
  for (const auto& name : c.label_names) out << ",p_" << name;
  out << ",predicted,label";
  for (Index j = 0; j < c.model.q(); ++j) out << ",mu" << j;
  for (Index j = 0; j < c.model.q(); ++j) out << ",s" << j;
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = static_cast<Index>(i);
    out << rows[i];
    for (Index k = 0; k < c.model.k(); ++k) out << ',' << e.decoded.probabilities(r, k);
    out << ',' << c.label_names[static_cast<std::size_t>(e.decoded.labels[i])] << ','
        << c.label_names[static_cast<std::size_t>(e.truth[i])];
    for (Index j = 0; j < c.model.q(); ++j) out << ',' << e.inference.latent.mean(r, j);
    for (Index j = 0; j < c.model.q(); ++j) out << ',' << e.inference.latent.scale(r, j);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + o.out);
  std::cout << "predicted " << rows.size() << " rows with " << e.inference.iterations
            << " test-time iterations; accuracy " << e.metrics.accuracy << "\n";
  if (with_metrics) {
    json doc = provenance(config);
    doc["metrics"] = metrics_json(e.metrics);
    doc["test_time_iterations"] = e.inference.iterations;
    doc["rows"] = rows.size();
    const std::string path = o.metrics_out.empty() ? o.out + ".metrics.json" : o.metrics_out;
    write_json(path, doc);
    std::cout << "precision " << e.metrics.precision << " recall " << e.metrics.recall << " f1 " << e.metrics.f1
              << (e.metrics.zero_division ? " (some class had no predictions or members)" : "") << "\nmetrics " << path
              << "\n";
  }
}

// ---- latent / ard ----------------------------------------------------------

struct LatentOptions {
  std::string checkpoint;
  DataSpec data;
  std::string out;
};

void cmd_latent(const LatentOptions& o) {
  const Checkpoint c = load_checkpoint(o.checkpoint);
  const Dataset raw = o.data.load();
  const Dataset train = training_data(c, raw);
  const FreeFormLatent lat = c.model.training_latent(train);
  const std::vector<Index> labels = train.labels();
  std::ofstream out = open_out(o.out);
  for (const auto& line : csv_comments(json{{"command", "latent"}, {"checkpoint", o.checkpoint}, {"data", o.data.echo()}}))
    out << "# " << line << '\n';
  out << "row";
  for (Index j = 0; j < c.model.q(); ++j) out << ",mu" << j;
  for (Index j = 0; j < c.model.q(); ++j) out << ",s" << j;
  out << ",label\n";
  for (Index i = 0; i < lat.mean.rows(); ++i) {
    out << c.train_rows[static_cast<std::size_t>(i)];
    for (Index j = 0; j < c.model.q(); ++j) out << ',' << lat.mean(i, j);
    for (Index j = 0; j < c.model.q(); ++j) out << ',' << lat.scale(i, j);
    out << ',' << c.label_names[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] << '\n';
  }
  if (!out) throw IoError("write failed for " + o.out);
  std::cout << "wrote " << lat.mean.rows() << " latent rows to " << o.out << "\n";
}

struct ArdOptions {
  std::string checkpoint;
  double ratio = 0.2;
  std::string out;
};

json ard_json(const ArdKernel& k, double ratio) {
  const ArdSelection s = ard_report(k, ratio);
  std::vector<double> alpha(k.inv_lengthscales.data(), k.inv_lengthscales.data() + k.dims());
  return json{{"variance", k.variance}, {"alpha", alpha}, {"selected", s.dims}, {"sorted_alpha", s.sorted}, {"order", s.order}};
}

void cmd_ard(const ArdOptions& o) {
  const Checkpoint c = load_checkpoint(o.checkpoint);
  json doc = provenance(json{{"command", "ard"}, {"checkpoint", o.checkpoint}, {"ratio", o.ratio}});
  doc["regression"] = ard_json(c.model.regression_path().kernel, o.ratio);
  if (c.model.config().include_classification) doc["classification"] = ard_json(c.model.classification_path().kernel, o.ratio);
  write_json(o.out, doc);
  std::cout << "regression path selects " << doc["regression"]["selected"].size() << " dims";
  if (doc.contains("classification")) std::cout << ", classification path selects " << doc["classification"]["selected"].size();
  std::cout << "\n";
}

// ---- generate --------------------------------------------------------------

struct GenerateOptions {
  std::string checkpoint;
  std::string points;
  Index near_class = -1;
  Index count = 1;
  DataSpec data;
  bool noisy = false;
  std::string out;
};

Matrix read_points(const std::string& path, Index q) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ValidationError(path + ": cannot parse '" + cell + "'");
      }
    }
    if (static_cast<Index>(row.size()) != q) {
      throw ValidationError(path + ": expected " + std::to_string(q) + " latent coordinates per row");
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Index>(rows.size()), q);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Index j = 0; j < q; ++j) m(static_cast<Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return m;
}

void cmd_generate(const GenerateOptions& o, const Global& g) {
  const std::uint64_t seed = resolve_seed(g);
  const Checkpoint c = load_checkpoint(o.checkpoint);
  const Index q = c.model.q();
  Matrix points;
  if (!o.points.empty()) {
    points = read_points(o.points, q);
  } else if (o.near_class >= 0) {
    if (o.near_class >= c.model.k()) {
      throw ValidationError("--near-class " + std::to_string(o.near_class) + " out of range (K=" +
                            std::to_string(c.model.k()) + ")");
    }
    const Dataset train = training_data(c, o.data.load());
    const Matrix mu = c.model.training_latent(train).mean;
    const std::vector<Index> labels = train.labels();
    std::vector<Index> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == o.near_class) members.push_back(static_cast<Index>(i));
    if (members.empty()) throw ValidationError("class has no training rows");
    Matrix cm(static_cast<Index>(members.size()), q);
    for (std::size_t i = 0; i < members.size(); ++i) cm.row(static_cast<Index>(i)) = mu.row(members[i]);
    const RowVector centroid = cm.colwise().mean();
    const RowVector sd = ((cm.rowwise() - centroid).colwise().squaredNorm() / static_cast<double>(cm.rows())).cwiseSqrt();
    RandomSource rng = RandomSource(seed).substream("near-class");
    points.resize(o.count, q);
    for (Index i = 0; i < o.count; ++i) {
      points.row(i) = centroid + 0.1 * sd.cwiseProduct(rng.normal_matrix(1, q).row(0));
    }
  } else {
    throw ValidationError("pass --points or --near-class");
  }

  const Generated gen = c.model.generate(points);
  Matrix mean = gen.mean;
  const Matrix& var = o.noisy ? gen.noisy_variance : gen.variance;
  if (o.noisy && mean.rows() > 0) {
    RandomSource rng = RandomSource(seed).substream("generate-noise");
    mean += (rng.normal_matrix(mean.rows(), mean.cols()).array() * gen.noisy_variance.cwiseSqrt().array()).matrix();
  }
  const Matrix raw_mean = mean.rows() > 0 ? c.postprocess(mean) : mean;
  const Matrix raw_sd = (var.cwiseSqrt().array().rowwise() * c.standardizer.scale.array()).matrix();

  std::ofstream out = open_out(o.out);
  const json config{{"command", "generate"}, {"checkpoint", o.checkpoint}, {"points", o.points},
                    {"near_class", o.near_class}, {"count", o.count}, {"noisy", o.noisy}, {"seed", seed}};
  for (const auto& line : csv_comments(config)) out << "# " << line << '\n';
  bool first = true;
  for (Index j : c.feature_columns) {
    out << (first ? "" : ",") << c.feature_names[static_cast<std::size_t>(j)];
    first = false;
  }
  for (Index j : c.feature_columns) out << ",sd_" << c.feature_names[static_cast<std::size_t>(j)];
  out << '\n';
  for (Index i = 0; i < raw_mean.rows(); ++i) {
    for (Index j = 0; j < raw_mean.cols(); ++j) out << (j ? "," : "") << raw_mean(i, j);
    for (Index j = 0; j < raw_sd.cols(); ++j) out << ',' << raw_sd(i, j);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + o.out);
  std::cout << "generated " << raw_mean.rows() << " rows to " << o.out << "\n";
}

// ---- gradcheck -------------------------------------------------------------

struct GradcheckOptions {
  int seeds = 20;
  std::string inject_fault;
  double step = 1e-5;
  double tol = 1e-4;
  std::string out;
};

int cmd_gradcheck(const GradcheckOptions& o, const Global& g) {
  const std::uint64_t base = resolve_seed(g);
  if (o.seeds < 1) throw ValidationError("--seeds must be positive");
  GradientCheckOptions opts;
  opts.step = o.step;
  opts.rel_tol = o.tol;
  bool all_passed = true;
  json runs = json::array();
  std::map<std::string, double> worst;
  std::vector<std::string> failed_blocks;
  for (int s = 0; s < o.seeds; ++s) {
    const GradcheckInstance inst = run_gradcheck(base + static_cast<std::uint64_t>(s), o.inject_fault, opts);
    json blocks = json::object();
    for (const auto& b : inst.report.blocks) {
      blocks[b.name] = json{{"max_rel_error", b.max_rel_error}, {"checked", b.checked}, {"passed", b.passed}};
      worst[b.name] = std::max(worst[b.name], b.max_rel_error);
      if (!b.passed && std::find(failed_blocks.begin(), failed_blocks.end(), b.name) == failed_blocks.end()) {
        failed_blocks.push_back(b.name);
      }
    }
    runs.push_back(json{{"seed", inst.seed}, {"kind", to_string(inst.kind)}, {"N", inst.n}, {"D", inst.d}, {"K", inst.k},
                        {"Q", inst.q}, {"M_r", inst.m_reg}, {"M_c", inst.m_cls}, {"J", inst.samples},
                        {"passed", inst.report.passed}, {"blocks", blocks}});
    all_passed = all_passed && inst.report.passed;
  }
  for (const auto& [name, err] : worst) {
    std::cout << (err < o.tol ? "ok    " : "FAIL  ") << name << "  max relative error " << err << "\n";
  }
  if (!o.out.empty()) {
    json doc = provenance(json{{"command", "gradcheck"}, {"seeds", o.seeds}, {"seed", base}, {"inject_fault", o.inject_fault},
                               {"step", o.step}, {"tol", o.tol}});
    doc["runs"] = runs;
    doc["passed"] = all_passed;
    write_json(o.out, doc);
  }
  if (!all_passed) {
    std::cout << "gradient check failed in block(s):";
    for (const auto& b : failed_blocks) std::cout << ' ' << b;
    std::cout << "\n";
    return kNumerical;
  }
  std::cout << "gradient check passed on " << o.seeds << " instances\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // large per-step buffers; keep them on the heap instead of fresh mappings
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"Latent discriminative generative decoder: training, inference and diagnostics"};
  app.set_config("--config", "", "TOML configuration file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  Global global;
  auto* seed_opt = app.add_option("--seed", global.seed, "Random seed (falls back to LDGD_SEED, then 0)");
  app.set_version_flag("--version", LDGD_VERSION);

  GenDataOptions gen;
  auto* c_gen = app.add_subcommand("gen-data", "Generate the synthetic moons datasets");
  c_gen->add_option("--kind", gen.kind, "moons or moons-linear")->capture_default_str();
  c_gen->add_option("--base-dim", gen.base_dim, "Dimension of the linear expansion before noise doubling")->capture_default_str();
  c_gen->add_option("--n", gen.n, "Number of samples (even)")->capture_default_str();
  c_gen->add_option("--noise", gen.noise, "Moons noise standard deviation")->capture_default_str();
  c_gen->add_option("--out", gen.out, "Output CSV")->required();

  TrainOptions train;
  auto* c_train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train.data.add_to(c_train);
  c_train->add_option("--test-fraction", train.test_fraction, "Held-out fraction (stratified); 0 trains on all rows")->capture_default_str();
  c_train->add_option("--folds", train.folds, "Use stratified k-fold instead of a single split");
  c_train->add_option("--fold", train.fold, "Which fold is held out");
  c_train->add_option("--model", train.model, "ldgd or fast_ldgd")->capture_default_str();
  c_train->add_option("--Q", train.q, "Latent dimensions")->capture_default_str();
  c_train->add_option("--M", train.m, "Inducing points per path")->capture_default_str();
  c_train->add_option("--M-r", train.m_reg, "Inducing points, regression path (overrides --M)");
  c_train->add_option("--M-c", train.m_cls, "Inducing points, classification path (overrides --M)");
  c_train->add_option("--quadrature", train.quadrature, "Gauss-Hermite order")->capture_default_str();
  c_train->add_option("--J", train.samples, "Latent samples per step")->capture_default_str();
  c_train->add_option("--jitter", train.jitter, "Diagonal jitter for inducing covariances")->capture_default_str();
  c_train->add_option("--latent-init", train.latent_init, "ppca or random")->capture_default_str();
  c_train->add_option("--inducing-init", train.inducing_init, "normal or subset")->capture_default_str();
  c_train->add_option("--encoder-hidden", train.encoder_hidden, "Encoder hidden sizes (fast_ldgd)")->delimiter(',');
  c_train->add_option("--alpha-init", train.alpha_init, "Initial ARD inverse length-scale")->capture_default_str();
  c_train->add_option("--initial-scale", train.initial_scale, "Initial latent standard deviation")->capture_default_str();
  c_train->add_option("--batch-size", train.batch_size, "Minibatch size")->capture_default_str();
  c_train->add_option("--lr", train.lr, "Adam learning rate")->capture_default_str();
  c_train->add_option("--iters", train.iters, "Training iterations")->capture_default_str();
  c_train->add_option("--report-samples", train.report_samples, "Latent samples for the final ELBO report")->capture_default_str();
  c_train->add_flag("--no-standardize", train.no_standardize, "Keep raw feature scales");
  c_train->add_flag("--drop-constant", train.drop_constant, "Drop feature columns constant on the training rows");
  c_train->add_option("--out", train.out, "Checkpoint path")->required();
  c_train->add_option("--trace", train.trace, "Trace path (default <out>.trace.json)");

  PredictOptions pred;
  auto* c_pred = app.add_subcommand("predict", "Infer test latents and decode labels");
  auto* c_eval = app.add_subcommand("evaluate", "predict plus a metrics report");
  for (auto* c : {c_pred, c_eval}) {
    c->add_option("--checkpoint", pred.checkpoint, "Checkpoint path")->required();
    pred.data.add_to(c);
    c->add_option("--rows", pred.rows, "test, train or all")->capture_default_str();
    c->add_option("--test-lr", pred.test_lr, "Test-time Adam learning rate")->capture_default_str();
    c->add_option("--test-iters", pred.test_iters, "Test-time iterations")->capture_default_str();
    c->add_flag("--test-ppca-init", pred.ppca_init, "Start test latents at the PPCA projection");
    c->add_option("--threads", pred.threads, "Worker threads for test inference")->capture_default_str();
    c->add_option("--out", pred.out, "Predictions CSV")->required();
  }
  c_eval->add_option("--metrics", pred.metrics_out, "Metrics JSON (default <out>.metrics.json)");

  LatentOptions lat;
  auto* c_lat = app.add_subcommand("latent", "Export training latent means and scales");
  c_lat->add_option("--checkpoint", lat.checkpoint, "Checkpoint path")->required();
  lat.data.add_to(c_lat);
  c_lat->add_option("--out", lat.out, "Output CSV")->required();

  ArdOptions ard;
  auto* c_ard = app.add_subcommand("ard", "Export ARD coefficients and relevance selections");
  c_ard->add_option("--checkpoint", ard.checkpoint, "Checkpoint path")->required();
  c_ard->add_option("--ratio", ard.ratio, "Selection threshold relative to the largest alpha")->capture_default_str();
  c_ard->add_option("--out", ard.out, "Output JSON")->required();

  GenerateOptions genr;
  auto* c_genr = app.add_subcommand("generate", "Decode latent points to feature space");
  c_genr->add_option("--checkpoint", genr.checkpoint, "Checkpoint path")->required();
  c_genr->add_option("--points", genr.points, "CSV of latent points (header row, Q columns)");
  c_genr->add_option("--near-class", genr.near_class, "Sample near this class's latent centroid");
  c_genr->add_option("--count", genr.count, "Samples for --near-class")->capture_default_str();
  genr.data.add_to(c_genr);
  c_genr->add_flag("--noisy", genr.noisy, "Add observation noise draws");
  c_genr->add_option("--out", genr.out, "Output CSV")->required();

  GradcheckOptions gc;
  auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference check of ELBO gradients on random tiny models");
  c_gc->add_option("--seeds", gc.seeds, "Number of random instances")->capture_default_str();
  c_gc->add_option("--inject-fault", gc.inject_fault, "Corrupt the analytic gradient of this block");
  c_gc->add_option("--step", gc.step, "Central-difference step")->capture_default_str();
  c_gc->add_option("--tol", gc.tol, "Relative error tolerance")->capture_default_str();
  c_gc->add_option("--out", gc.out, "Report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  global.seed_given = seed_opt->count() > 0;

  try {
    if (c_gen->parsed()) cmd_gen_data(gen, global);
    if (c_train->parsed()) cmd_train(train, global);
    if (c_pred->parsed()) cmd_predict(pred, global, false);
    if (c_eval->parsed()) cmd_predict(pred, global, true);
    if (c_lat->parsed()) cmd_latent(lat);
    if (c_ard->parsed()) cmd_ard(ard);
    if (c_genr->parsed()) cmd_generate(genr, global);
    if (c_gc->parsed()) return cmd_gradcheck(gc, global);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}
