#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "ldgd/data.hpp"

using namespace ldgd;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

// count images of 2x3 pixels; image i is filled with value i, label i % 10
void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels, std::uint32_t count,
               std::uint32_t image_magic = 0x803, std::uint32_t label_magic = 0x801, std::uint32_t label_count = 0,
               std::uint32_t bytes = 0) {
  std::ofstream im(images, std::ios::binary);
  put_u32(im, image_magic);
  put_u32(im, count);
  put_u32(im, 2);
  put_u32(im, 3);
  const std::uint32_t payload = bytes ? bytes : count * 6;
  for (std::uint32_t b = 0; b < payload; ++b) im.put(static_cast<char>((b / 6) % 256));
  std::ofstream lb(labels, std::ios::binary);
  put_u32(lb, label_magic);
  put_u32(lb, label_count ? label_count : count);
  for (std::uint32_t i = 0; i < (label_count ? label_count : count); ++i) lb.put(static_cast<char>(i % 10));
}

double correlation(const Vector& a, const Vector& b) {
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

}  // namespace

TEST_CASE("make_moons") {
  const MoonsSample m = make_moons(500, 0.1, 3);
  CHECK(m.points.rows() == 500);
  CHECK(std::count(m.labels.begin(), m.labels.end(), 0) == 250);
  CHECK_THROWS_AS(make_moons(7, 0.1, 3), InvalidArgument);

  const MoonsSample clean = make_moons(10, 0.0, 3);
  CHECK(clean.points(0, 0) == 1.0);
  CHECK(clean.points(0, 1) == 0.0);
  CHECK(clean.labels[0] == 0);

  for (double noise : {0.0, 0.05, 0.1}) {
    const MoonsSample s = make_moons(500, noise, 9);
    RowVector c0 = RowVector::Zero(2), c1 = RowVector::Zero(2);
    for (Index i = 0; i < 500; ++i) (s.labels[static_cast<std::size_t>(i)] == 0 ? c0 : c1) += s.points.row(i) / 250.0;
    CHECK(std::abs(c0(0) - c1(0)) > 0.4);
    CHECK(std::abs(c0(1) - c1(1)) > 0.4);
  }
  const MoonsSample again = make_moons(500, 0.1, 3);
  CHECK(again.points == m.points);
}

TEST_CASE("expansions") {
  const MoonsSample m = make_moons(500, 0.1, 4);
  const Matrix e = expand_linear(m.points, 5, 11);
  CHECK(e.cols() == 5);
  const Vector sv = Eigen::JacobiSVD<Matrix>(e).singularValues();
  CHECK(sv(2) < 1e-8 * sv(0));

  Matrix w = Matrix::Zero(4, 2);
  w(0, 0) = 1;
  w(1, 1) = 1;
  w(2, 0) = 3;
  const Matrix emb = expand_linear(m.points, w);
  CHECK(emb.leftCols(2) == m.points);

  const Matrix noisy = expand_noise_channels(e, 12);
  REQUIRE(noisy.cols() == 10);
  CHECK(noisy.leftCols(5) == e);
  Vector labels(500);
  for (Index i = 0; i < 500; ++i) labels(i) = static_cast<double>(m.labels[static_cast<std::size_t>(i)]);
  for (Index j = 5; j < 10; ++j) {
    const Vector col = noisy.col(j);
    const double var = (col.array() - col.mean()).square().sum() / 499.0;
    CHECK(std::abs(var - 1.0) < 0.1);
    CHECK(std::abs(correlation(col, labels)) < 0.15);
  }

  const Dataset s10 = make_synthetic(5, 500, 0.1, 7);
  CHECK(s10.n() == 500);
  CHECK(s10.d() == 10);
  CHECK(s10.k() == 2);
  CHECK(make_synthetic(20, 500, 0.1, 7).d() == 40);
  CHECK(make_synthetic(5, 500, 0.1, 7).yr == s10.yr);
}

TEST_CASE("one hot round trip and argmax ties") {
  const std::vector<Index> labels{2, 0, 1, 1, 2};
  const Matrix oh = one_hot(labels, 3);
  CHECK(oh.rowwise().sum().isApprox(Vector::Ones(5)));
  CHECK(argmax_rows(oh) == labels);
  Matrix tie(1, 3);
  tie << 0.4, 0.4, 0.2;
  CHECK(argmax_rows(tie)[0] == 0);
  CHECK_THROWS_AS(one_hot({3}, 3), InvalidArgument);
}

TEST_CASE("csv loading") {
  const auto good = testing::scratch("good.csv");
  write_text(good, "# comment\na,b,species\n1,2,setosa\n3,4.5,virginica\n-1,1e-3,setosa\n");
  const Dataset d = load_csv(good, "species");
  CHECK(d.n() == 3);
  CHECK(d.d() == 2);
  CHECK(d.k() == 2);
  CHECK(d.label_names == std::vector<std::string>{"setosa", "virginica"});
  CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(d.yr(1, 1) == 4.5);
  CHECK(d.labels() == std::vector<Index>{0, 1, 0});

  const auto numeric = testing::scratch("numeric.csv");
  write_text(numeric, "x,label\n0.5,3\n0.1,1\n0.2,2\n");
  CHECK(load_csv(numeric, "label").label_names == std::vector<std::string>{"1", "2", "3"});

  const auto bad = testing::scratch("bad.csv");
  write_text(bad, "a,b,label\n1,2,x\n3,oops,y\n");
  try {
    (void)load_csv(bad, "label");
    FAIL("expected CsvCellError");
  } catch (const CsvCellError& e) {
    CHECK(e.row() == 2);
    CHECK(e.column() == "b");
  }
  const auto missing = testing::scratch("missing.csv");
  write_text(missing, "a,b,label\n1,,x\n");
  CHECK_THROWS_AS(load_csv(missing, "label"), CsvCellError);
  CHECK_THROWS_AS(load_csv(good, "nope"), UnknownColumnError);
  CHECK_THROWS_AS(load_csv(testing::scratch("absent.csv"), "label"), IoError);

  const auto round = testing::scratch("round.csv");
  write_csv(round, d, {"hello"});
  const Dataset back = load_csv(round, "label");
  CHECK(back.yr == d.yr);
  CHECK(back.label_names == d.label_names);
}

TEST_CASE("idx loading") {
  const auto im = testing::scratch("img.idx"), lb = testing::scratch("lbl.idx");
  write_idx(im, lb, 40);
  const Dataset all = load_idx_images(im, lb);
  CHECK(all.n() == 40);
  CHECK(all.d() == 6);
  CHECK(all.k() == 10);
  CHECK(all.yr(3, 0) == doctest::Approx(3.0 / 255.0));

  const Dataset sub = load_idx_images(im, lb, {0, 1, 2}, 2);
  CHECK(sub.n() == 6);
  CHECK(sub.k() == 3);
  // first occurrences are kept, in file order: images 0, 1, 2, 10, 11, 12
  CHECK(sub.yr(1, 0) == doctest::Approx(1.0 / 255.0));
  CHECK(sub.yr(3, 0) == doctest::Approx(10.0 / 255.0));
  CHECK(sub.labels() == std::vector<Index>{0, 1, 2, 0, 1, 2});

  write_idx(im, lb, 10, 0x803, 0x999);
  CHECK_THROWS_AS(load_idx_images(im, lb), IdxMagicError);
  write_idx(im, lb, 10, 0x804, 0x801);
  CHECK_THROWS_AS(load_idx_images(im, lb), IdxMagicError);
  write_idx(im, lb, 10, 0x803, 0x801, 0, 30);
  CHECK_THROWS_AS(load_idx_images(im, lb), IdxTruncatedError);
  write_idx(im, lb, 10, 0x803, 0x801, 9);
  CHECK_THROWS_AS(load_idx_images(im, lb), IdxCountMismatchError);
}

TEST_CASE("idx label header is checked before the image payload") {
  // image header claims an absurd size; a bad labels file must still be reported first
  const auto im = testing::scratch("huge.idx"), lb = testing::scratch("huge_lbl.idx");
  {
    std::ofstream out(im, std::ios::binary);
    put_u32(out, 0x803);
    put_u32(out, 0xFFFFFFF0u);
    put_u32(out, 28);
    put_u32(out, 28);
  }
  {
    std::ofstream out(lb, std::ios::binary);
    put_u32(out, 0x1234);
    put_u32(out, 1);
  }
  CHECK_THROWS_AS(load_idx_images(im, lb), IdxMagicError);
}

TEST_CASE("splits") {
  std::vector<Index> labels;
  for (Index c = 0; c < 3; ++c)
    for (int i = 0; i < 50; ++i) labels.push_back(c);
  const Split s = stratified_split(labels, 0.2, 1);
  CHECK(s.test.size() == 30);
  CHECK(s.train.size() == 120);
  for (Index c = 0; c < 3; ++c) {
    CHECK(std::count_if(s.test.begin(), s.test.end(), [&](Index i) { return labels[static_cast<std::size_t>(i)] == c; }) == 10);
  }
  std::set<Index> seen(s.train.begin(), s.train.end());
  seen.insert(s.test.begin(), s.test.end());
  CHECK(seen.size() == 150);
  CHECK(stratified_split(labels, 0.2, 1).test == s.test);
  CHECK(stratified_split(labels, 0.2, 2).test != s.test);
  CHECK_THROWS_AS(stratified_split(labels, 0.0, 1), InvalidArgument);
  CHECK_THROWS_AS(stratified_split(labels, 1.0, 1), InvalidArgument);

  std::vector<Index> two;
  for (int i = 0; i < 500; ++i) two.push_back(i % 2);
  const std::vector<Split> folds = stratified_kfold(two, 5, 3);
  REQUIRE(folds.size() == 5);
  std::set<Index> covered;
  for (const auto& f : folds) {
    CHECK(f.test.size() == 100);
    CHECK(f.train.size() == 400);
    for (Index i : f.test) CHECK(covered.insert(i).second);
  }
  CHECK(covered.size() == 500);
  CHECK_THROWS_AS(stratified_kfold(two, 1, 3), InvalidArgument);
  CHECK_THROWS_AS(stratified_kfold({0, 0, 0, 1}, 2, 3), InvalidArgument);
}

TEST_CASE("standardizer") {
  RandomSource rng(61);
  Matrix y = rng.normal_matrix(20, 3) * 5.0;
  y.col(1).setConstant(2.0);
  const Standardizer s = Standardizer::fit(y);
  CHECK(s.scale(1) == 1.0);
  const Matrix z = s.transform(y);
  CHECK(std::abs(z.col(0).mean()) < 1e-12);
  CHECK(testing::max_abs(s.inverse(z) - y) < 1e-10);
  CHECK(varying_columns(y) == std::vector<Index>{0, 2});
}

TEST_CASE("metrics") {
  std::vector<Index> truth, pred;
  for (int i = 0; i < 10; ++i) truth.push_back(0);
  for (int i = 0; i < 10; ++i) truth.push_back(1);
  for (int i = 0; i < 8; ++i) pred.push_back(0);
  pred.push_back(1);
  pred.push_back(1);
  pred.push_back(0);
  for (int i = 0; i < 9; ++i) pred.push_back(1);
  const MetricsReport m = metrics(pred, truth, 2);
  CHECK(m.confusion(0, 0) == 8);
  CHECK(m.confusion(0, 1) == 2);
  CHECK(m.confusion(1, 0) == 1);
  CHECK(m.confusion.sum() == 20);
  CHECK(m.accuracy == doctest::Approx(0.85));
  CHECK(m.class_precision[0] == doctest::Approx(8.0 / 9.0));
  CHECK(m.class_recall[0] == doctest::Approx(0.8));
  double f1 = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double tp = m.confusion(c, c);
    const double p = tp / m.confusion.col(c).sum(), r = tp / m.confusion.row(c).sum();
    f1 += 0.5 * 2 * p * r / (p + r);
  }
  CHECK(std::abs(m.f1 - f1) < 1e-12);

  const MetricsReport perfect = metrics(truth, truth, 2);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  std::vector<Index> wrong;
  for (Index t : truth) wrong.push_back(1 - t);
  const MetricsReport w = metrics(wrong, truth, 2);
  CHECK(w.accuracy == 0.0);
  CHECK(w.f1 == 0.0);

  const MetricsReport empty_class = metrics(std::vector<Index>(20, 0), truth, 2);
  CHECK(empty_class.zero_division);
  CHECK(empty_class.class_precision[1] == 0.0);
  CHECK_THROWS_AS(metrics({0, 1}, {0}, 2), InvalidArgument);
}
