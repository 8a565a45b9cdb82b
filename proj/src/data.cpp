#include "ldgd/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace ldgd {

std::vector<Index> Dataset::labels() const { return argmax_rows(yc); }

Dataset Dataset::subset(std::span<const Index> rows) const {
  Dataset out;
  out.yr.resize(static_cast<Index>(rows.size()), d());
  out.yc.resize(static_cast<Index>(rows.size()), k());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= n()) throw InvalidArgument("Dataset::subset: row index out of range");
    out.yr.row(static_cast<Index>(i)) = yr.row(rows[i]);
    out.yc.row(static_cast<Index>(i)) = yc.row(rows[i]);
  }
  out.label_names = label_names;
  out.feature_names = feature_names;
  return out;
}

Dataset make_dataset(Matrix yr, const std::vector<Index>& labels, Index k, std::vector<std::string> label_names,
                     std::vector<std::string> feature_names) {
  if (static_cast<Index>(labels.size()) != yr.rows()) throw InvalidArgument("make_dataset: label count mismatch");
  if (!yr.allFinite()) throw InvalidArgument("make_dataset: non-finite feature");
  Dataset out;
  out.yc = one_hot(labels, k);
  out.yr = std::move(yr);
  if (label_names.empty()) {
    for (Index c = 0; c < k; ++c) label_names.push_back(std::to_string(c));
  }
  if (feature_names.empty()) {
    for (Index j = 0; j < out.yr.cols(); ++j) feature_names.push_back("x" + std::to_string(j));
  }
  if (static_cast<Index>(label_names.size()) != k || static_cast<Index>(feature_names.size()) != out.yr.cols()) {
    throw InvalidArgument("make_dataset: name count mismatch");
  }
  out.label_names = std::move(label_names);
  out.feature_names = std::move(feature_names);
  return out;
}

Matrix one_hot(const std::vector<Index>& labels, Index k) {
  Matrix m = Matrix::Zero(static_cast<Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) throw InvalidArgument("one_hot: label out of range");
    m(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return m;
}

std::vector<Index> argmax_rows(const Matrix& m) {
  std::vector<Index> out(static_cast<std::size_t>(m.rows()), 0);
  for (Index i = 0; i < m.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < m.cols(); ++j)
      if (m(i, j) > m(i, best)) best = j;
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

// ---- synthetic -------------------------------------------------------------

MoonsSample make_moons(Index n, double noise_std, std::uint64_t seed) {
  if (n <= 0 || n % 2 != 0) throw InvalidArgument("make_moons: n must be a positive even count");
  if (noise_std < 0.0) throw InvalidArgument("make_moons: noise_std must be non-negative");
  const Index half = n / 2;
  MoonsSample out;
  out.points.resize(n, 2);
  out.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < half; ++i) {
    const double t = half > 1 ? std::numbers::pi * static_cast<double>(i) / static_cast<double>(half - 1) : 0.0;
    out.points.row(i) << std::cos(t), std::sin(t);
    out.points.row(half + i) << 1.0 - std::cos(t), 0.5 - std::sin(t);
    out.labels[static_cast<std::size_t>(i)] = 0;
    out.labels[static_cast<std::size_t>(half + i)] = 1;
  }
  if (noise_std > 0.0) {
    RandomSource rng = RandomSource(seed).substream("moons");
    out.points += noise_std * rng.normal_matrix(n, 2);
  }
  return out;
}

Matrix expand_linear(const Matrix& base, const Matrix& w) {
  if (w.cols() != base.cols()) throw InvalidArgument("expand_linear: W must have base.cols() columns");
  return base * w.transpose();
}

Matrix expand_linear(const Matrix& base, Index target_dim, std::uint64_t seed) {
  if (target_dim < 2) throw InvalidArgument("expand_linear: target_dim must be >= 2");
  RandomSource rng = RandomSource(seed).substream("expand-linear");
  return expand_linear(base, rng.normal_matrix(target_dim, base.cols()));
}

Matrix expand_noise_channels(const Matrix& base, std::uint64_t seed) {
  RandomSource rng = RandomSource(seed).substream("noise-channels");
  Matrix out(base.rows(), 2 * base.cols());
  out.leftCols(base.cols()) = base;
  out.rightCols(base.cols()) = rng.normal_matrix(base.rows(), base.cols());
  return out;
}

Dataset make_synthetic(Index base_dim, Index n, double noise_std, std::uint64_t seed) {
  MoonsSample moons = make_moons(n, noise_std, seed);
  Matrix y = expand_noise_channels(expand_linear(moons.points, base_dim, seed), seed);
  return make_dataset(std::move(y), moons.labels, 2);
}

// ---- CSV -------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_integer(const std::string& s, long long& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    have_header = true;
    break;
  }
  if (!have_header) throw ValidationError(path.string() + ": empty file, header row expected");
  const std::vector<std::string> header = split_csv_line(line);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw UnknownColumnError(path.string() + ": no column named '" + label_column + "'");
  }
  const std::size_t label_pos = static_cast<std::size_t>(label_it - header.begin());
  std::vector<std::string> features;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (j != label_pos) features.push_back(header[j]);

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  Index row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line[0] == '#') continue;
    ++row;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw CsvCellError(row, "", path.string() + ": row " + std::to_string(row) + " has " +
                                      std::to_string(cells.size()) + " cells, header has " +
                                      std::to_string(header.size()));
    }
    std::vector<double> values;
    values.reserve(features.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (cells[j].empty()) {
        throw CsvCellError(row, header[j], path.string() + ": row " + std::to_string(row) + ", column '" + header[j] +
                                               "': missing value");
      }
      if (j == label_pos) continue;
      double v = 0.0;
      if (!parse_double(cells[j], v)) {
        throw CsvCellError(row, header[j], path.string() + ": row " + std::to_string(row) + ", column '" + header[j] +
                                               "': cannot parse '" + cells[j] + "' as a number");
      }
      values.push_back(v);
    }
    rows.push_back(std::move(values));
    raw_labels.push_back(cells[label_pos]);
  }
  if (rows.empty()) throw ValidationError(path.string() + ": no data rows");

  std::vector<std::string> names;
  bool all_int = true;
  for (const auto& s : raw_labels) {
    long long v = 0;
    all_int = all_int && parse_integer(s, v);
    if (std::find(names.begin(), names.end(), s) == names.end()) names.push_back(s);
  }
  if (all_int) {
    std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
      return std::stoll(a) < std::stoll(b);
    });
  }
  std::map<std::string, Index> code;
  for (std::size_t c = 0; c < names.size(); ++c) code[names[c]] = static_cast<Index>(c);

  Matrix yr(static_cast<Index>(rows.size()), static_cast<Index>(features.size()));
  std::vector<Index> labels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < features.size(); ++j) yr(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    labels.push_back(code[raw_labels[i]]);
  }
  return make_dataset(std::move(yr), labels, static_cast<Index>(names.size()), names, features);
}

void write_csv(const std::filesystem::path& path, const Dataset& data, const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& c : comments) out << "# " << c << '\n';
  for (const auto& f : data.feature_names) out << f << ',';
  out << "label\n";
  const std::vector<Index> labels = data.labels();
  std::array<char, 64> buf{};
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.d(); ++j) {
      auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), data.yr(i, j));
      out.write(buf.data(), ptr - buf.data());
      out << ',';
    }
    out << data.label_names[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

// ---- IDX -------------------------------------------------------------------

namespace {

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IdxTruncatedError(path.string() + ": truncated header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

Dataset load_idx_images(const std::filesystem::path& images, const std::filesystem::path& labels,
                        const std::vector<int>& keep_digits, Index max_per_digit) {
  std::ifstream lin = open_binary(labels);
  const std::uint32_t lmagic = read_be32(lin, labels);
  if (lmagic != 0x00000801u) throw IdxMagicError(labels.string() + ": bad label magic number");
  const std::uint32_t nlabels = read_be32(lin, labels);

  std::ifstream iin = open_binary(images);
  const std::uint32_t imagic = read_be32(iin, images);
  if (imagic != 0x00000803u) throw IdxMagicError(images.string() + ": bad image magic number");
  const std::uint32_t nimages = read_be32(iin, images);
  const std::uint32_t rows = read_be32(iin, images);
  const std::uint32_t cols = read_be32(iin, images);
  if (nimages != nlabels) {
    throw IdxCountMismatchError("IDX count mismatch: " + std::to_string(nimages) + " images vs " +
                                std::to_string(nlabels) + " labels");
  }
  const std::uintmax_t pixels = std::uintmax_t(rows) * cols;
  if (std::filesystem::file_size(labels) < 8 + std::uintmax_t(nlabels)) {
    throw IdxTruncatedError(labels.string() + ": label payload truncated");
  }
  if (std::filesystem::file_size(images) < 16 + pixels * nimages) {
    throw IdxTruncatedError(images.string() + ": image payload truncated");
  }

  std::vector<unsigned char> lab(nlabels);
  lin.read(reinterpret_cast<char*>(lab.data()), nlabels);
  if (!lin) throw IdxTruncatedError(labels.string() + ": label payload truncated");

  std::vector<int> digits = keep_digits;
  if (digits.empty()) {
    for (unsigned char l : lab) digits.push_back(l);
  }
  std::sort(digits.begin(), digits.end());
  digits.erase(std::unique(digits.begin(), digits.end()), digits.end());
  std::map<int, Index> code;
  for (std::size_t c = 0; c < digits.size(); ++c) code[digits[c]] = static_cast<Index>(c);

  std::vector<std::uint32_t> keep;
  std::map<int, Index> taken;
  for (std::uint32_t i = 0; i < nlabels; ++i) {
    const auto it = code.find(lab[i]);
    if (it == code.end()) continue;
    if (max_per_digit > 0 && taken[lab[i]] >= max_per_digit) continue;
    ++taken[lab[i]];
    keep.push_back(i);
  }

  Matrix yr(static_cast<Index>(keep.size()), static_cast<Index>(pixels));
  std::vector<Index> y;
  std::vector<unsigned char> buf(pixels);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    iin.seekg(static_cast<std::streamoff>(16 + pixels * keep[r]));
    if (!iin.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels))) {
      throw IdxTruncatedError(images.string() + ": image payload truncated");
    }
    for (std::size_t p = 0; p < pixels; ++p) yr(static_cast<Index>(r), static_cast<Index>(p)) = buf[p] / 255.0;
    y.push_back(code[lab[keep[r]]]);
  }
  std::vector<std::string> names;
  for (int dgt : digits) names.push_back(std::to_string(dgt));
  std::vector<std::string> features;
  for (std::uintmax_t p = 0; p < pixels; ++p) features.push_back("px" + std::to_string(p));
  return make_dataset(std::move(yr), y, static_cast<Index>(digits.size()), names, features);
}

// ---- splits ----------------------------------------------------------------

namespace {

std::vector<std::vector<Index>> shuffled_classes(const std::vector<Index>& labels, std::uint64_t seed) {
  Index k = 0;
  for (Index l : labels) {
    if (l < 0) throw InvalidArgument("split: negative label");
    k = std::max(k, l + 1);
  }
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
  RandomSource root(seed);
  for (std::size_t c = 0; c < members.size(); ++c) {
    RandomSource rng = root.substream("split-class-" + std::to_string(c));
    const std::vector<Index> perm = rng.permutation(static_cast<Index>(members[c].size()));
    std::vector<Index> shuffled;
    for (Index p : perm) shuffled.push_back(members[c][static_cast<std::size_t>(p)]);
    members[c] = std::move(shuffled);
  }
  return members;
}

}  // namespace

Split stratified_split(const std::vector<Index>& labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("split: test_fraction must be in (0, 1)");
  Split out;
  for (const auto& members : shuffled_classes(labels, seed)) {
    const Index n = static_cast<Index>(members.size());
    const Index ntest = static_cast<Index>(std::llround(test_fraction * static_cast<double>(n)));
    for (Index i = 0; i < n; ++i) (i < ntest ? out.test : out.train).push_back(members[static_cast<std::size_t>(i)]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<Split> stratified_kfold(const std::vector<Index>& labels, Index k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("kfold: k must be >= 2");
  const auto classes = shuffled_classes(labels, seed);
  std::vector<Index> fold_of(labels.size(), 0);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& members = classes[c];
    if (!members.empty() && static_cast<Index>(members.size()) < k) {
      throw InvalidArgument("kfold: class " + std::to_string(c) + " has fewer than k members");
    }
    for (std::size_t i = 0; i < members.size(); ++i) fold_of[static_cast<std::size_t>(members[i])] = static_cast<Index>(i) % k;
  }
  std::vector<Split> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (Index f = 0; f < k; ++f) {
      (fold_of[i] == f ? folds[static_cast<std::size_t>(f)].test : folds[static_cast<std::size_t>(f)].train)
          .push_back(static_cast<Index>(i));
    }
  }
  return folds;
}

// ---- preprocessing ---------------------------------------------------------

Standardizer Standardizer::fit(const Matrix& y) {
  if (y.rows() < 1) throw InvalidArgument("Standardizer::fit: empty matrix");
  Standardizer s;
  s.mean = y.colwise().mean();
  const Matrix c = y.rowwise() - s.mean;
  const double denom = static_cast<double>(std::max<Index>(y.rows() - 1, 1));
  s.scale = (c.colwise().squaredNorm() / denom).array().sqrt().matrix();
  for (Index j = 0; j < s.scale.size(); ++j)
    if (!(s.scale(j) > 1e-12)) s.scale(j) = 1.0;
  return s;
}

Standardizer Standardizer::identity(Index d) { return {RowVector::Zero(d), RowVector::Ones(d)}; }

Matrix Standardizer::transform(const Matrix& y) const {
  if (y.cols() != mean.size()) throw InvalidArgument("Standardizer: dimension mismatch");
  return ((y.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

Matrix Standardizer::inverse(const Matrix& z) const {
  if (z.cols() != mean.size()) throw InvalidArgument("Standardizer: dimension mismatch");
  return ((z.array().rowwise() * scale.array()).rowwise() + mean.array()).matrix();
}

std::vector<Index> varying_columns(const Matrix& y, double tol) {
  std::vector<Index> out;
  if (y.rows() == 0) return out;
  const RowVector mean = y.colwise().mean();
  for (Index j = 0; j < y.cols(); ++j) {
    const double var = (y.col(j).array() - mean(j)).square().mean();
    if (var > tol) out.push_back(j);
  }
  return out;
}

Matrix select_columns(const Matrix& y, std::span<const Index> cols) {
  Matrix out(y.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = y.col(cols[j]);
  return out;
}

// ---- metrics ---------------------------------------------------------------

MetricsReport metrics(const std::vector<Index>& predicted, const std::vector<Index>& truth, Index k) {
  if (predicted.size() != truth.size()) throw InvalidArgument("metrics: length mismatch");
  if (k < 1) throw InvalidArgument("metrics: k must be positive");
  MetricsReport r;
  r.confusion = Eigen::MatrixXi::Zero(k, k);
  Index correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= k || predicted[i] < 0 || predicted[i] >= k) {
      throw InvalidArgument("metrics: label out of range");
    }
    ++r.confusion(truth[i], predicted[i]);
    if (truth[i] == predicted[i]) ++correct;
  }
  r.accuracy = truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
  for (Index c = 0; c < k; ++c) {
    const double tp = r.confusion(c, c);
    const double pred_pos = r.confusion.col(c).sum();
    const double actual_pos = r.confusion.row(c).sum();
    double p = 0.0, rc = 0.0, f = 0.0;
    if (pred_pos > 0) p = tp / pred_pos; else r.zero_division = true;
    if (actual_pos > 0) rc = tp / actual_pos; else r.zero_division = true;
    if (p + rc > 0) f = 2.0 * p * rc / (p + rc);
    r.class_precision.push_back(p);
    r.class_recall.push_back(rc);
    r.class_f1.push_back(f);
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  r.precision = mean(r.class_precision);
  r.recall = mean(r.class_recall);
  r.f1 = mean(r.class_f1);
  return r;
}

}  // namespace ldgd
