#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "stylus/classifiers.hpp"
#include "stylus/rng.hpp"
#include "support/oracles.hpp"

using namespace stylus;
using namespace stylus::testsupport;

namespace {

SparseVector sv(std::vector<std::pair<uint64_t, double>> entries, uint64_t dim) {
  SparseVector v;
  v.dim = dim;
  for (auto& [i, x] : entries) {
    v.indices.push_back(i);
    v.values.push_back(x);
  }
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("classifiers");

TEST_CASE("multinomial NB matches the closed-form smoothing example") {
  std::vector<SparseVector> x = {sv({{0, 2.0}}, 2), sv({{1, 2.0}}, 2)};
  std::vector<Label> y = {Label::ClassA, Label::ClassB};
  NbModel m = nb_fit(x, y, 1.0);
  CHECK(std::exp(m.log_likelihood(0, 0)) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(std::exp(m.log_likelihood(0, 1)) == doctest::Approx(0.25).epsilon(1e-12));
  auto [pred, post] = nb_predict(m, sv({{0, 1.0}}, 2));
  CHECK(pred == Label::ClassA);
  CHECK(post[0] > post[1]);
}

TEST_CASE("alpha to zero drives the likelihood to one") {
  std::vector<SparseVector> x = {sv({{0, 2.0}}, 2), sv({{1, 2.0}}, 2)};
  std::vector<Label> y = {Label::ClassA, Label::ClassB};
  NbModel m = nb_fit(x, y, 1e-9);
  CHECK(std::exp(m.log_likelihood(0, 0)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("empty query falls back to the prior argmax") {
  std::vector<SparseVector> x = {sv({{0, 1.0}}, 2), sv({{0, 1.0}}, 2), sv({{1, 1.0}}, 2)};
  std::vector<Label> y = {Label::ClassA, Label::ClassA, Label::ClassB};
  NbModel m = nb_fit(x, y, 1.0);
  auto [pred, post] = nb_predict(m, sv({}, 2));
  CHECK(pred == Label::ClassA);
}

TEST_CASE("exact posterior ties resolve to ClassA") {
  std::vector<SparseVector> x = {sv({{0, 1.0}}, 2), sv({{1, 1.0}}, 2)};
  std::vector<Label> y = {Label::ClassA, Label::ClassB};
  NbModel m = nb_fit(x, y, 1.0);
  auto [pred, post] = nb_predict(m, sv({{0, 1.0}, {1, 1.0}}, 2));
  CHECK(post[0] == post[1]);
  CHECK(pred == Label::ClassA);
  CHECK(nb_score(m, sv({{0, 1.0}, {1, 1.0}}, 2)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("NB rejects single-class and negative input") {
  std::vector<SparseVector> x = {sv({{0, 1.0}}, 2), sv({{1, 1.0}}, 2)};
  CHECK_THROWS_AS(nb_fit(x, {Label::ClassA, Label::ClassA}, 1.0), Error);
  std::vector<SparseVector> neg = {sv({{0, -1.0}}, 2), sv({{1, 1.0}}, 2)};
  CHECK_THROWS_AS(nb_fit(neg, {Label::ClassA, Label::ClassB}, 1.0), Error);
}

TEST_CASE("NB equals the brute-force Bayes oracle on random corpora") {
  Rng rng(5);
  for (int round = 0; round < 10; ++round) {
    size_t n = 2 + rng.next_below(5);
    size_t dim = 1 + rng.next_below(4);
    std::vector<SparseVector> x;
    std::vector<std::vector<double>> dense;
    std::vector<Label> y;
    std::vector<int> yi;
    for (size_t i = 0; i < n; ++i) {
      std::vector<double> row(dim);
      for (double& v : row) v = static_cast<double>(rng.next_below(4));
      dense.push_back(row);
      x.push_back(dense_to_sparse(row));
      x.back().dim = dim;
      Label lab = i % 2 == 0 ? Label::ClassA : Label::ClassB;
      y.push_back(lab);
      yi.push_back(lab == Label::ClassA ? 0 : 1);
    }
    double alpha = 0.5 + rng.next_unit();
    NbModel m = nb_fit(x, y, alpha);
    for (size_t i = 0; i < n; ++i) {
      auto [pred, post] = nb_predict(m, x[i]);
      auto expected = oracle_nb_log_posterior(dense, yi, alpha, dense[i]);
      CHECK(std::abs(post[0] - expected[0]) < 1e-12);
      CHECK(std::abs(post[1] - expected[1]) < 1e-12);
      Label expected_pred = expected[0] >= expected[1] ? Label::ClassA : Label::ClassB;
      CHECK(pred == expected_pred);
    }
  }
}

TEST_CASE("gaussian NB separates shifted dense clouds") {
  Rng rng(31);
  std::vector<SparseVector> x;
  std::vector<Label> y;
  for (int i = 0; i < 40; ++i) {
    bool a = i % 2 == 0;
    std::vector<double> row = {(a ? 1.0 : -1.0) + rng.next_real(-0.3, 0.3),
                               rng.next_real(-1, 1)};
    x.push_back(dense_to_sparse(row));
    x.back().dim = 2;
    y.push_back(a ? Label::ClassA : Label::ClassB);
  }
  NbModel m = gaussian_nb_fit(x, y);
  size_t correct = 0;
  for (size_t i = 0; i < x.size(); ++i)
    if (nb_predict(m, x[i]).first == y[i]) ++correct;
  CHECK(correct >= 38);
}

TEST_CASE("pegasos separates the two-point set and its objective decreases") {
  std::vector<SparseVector> x = {sv({{0, 1.0}}, 2), sv({{0, -1.0}}, 2)};
  std::vector<Label> y = {Label::ClassA, Label::ClassB};
  SvmConfig one_epoch{0.1, 1, 3};
  SvmConfig five_epochs{0.1, 5, 3};
  SvmModel m1 = svm_fit(x, y, one_epoch);
  SvmModel m5 = svm_fit(x, y, five_epochs);
  CHECK(svm_predict(m5, x[0]) == Label::ClassA);
  CHECK(svm_predict(m5, x[1]) == Label::ClassB);
  CHECK(svm_objective(m5, x, y) < svm_objective(m1, x, y));
}

TEST_CASE("identical inputs with conflicting labels cap accuracy at half") {
  std::vector<SparseVector> x = {sv({{0, 1.0}}, 1), sv({{0, 1.0}}, 1)};
  std::vector<Label> y = {Label::ClassA, Label::ClassB};
  SvmModel m = svm_fit(x, y, {0.1, 10, 1});
  size_t correct = 0;
  for (size_t i = 0; i < 2; ++i)
    if (svm_predict(m, x[i]) == y[i]) ++correct;
  CHECK(correct == 1);
}

TEST_CASE("svm_predict follows the sign with ties to ClassA") {
  SvmModel m;
  m.weight = {1.0, 0.0};
  m.bias = 0.0;
  CHECK(svm_predict(m, sv({{0, 2.0}}, 2)) == Label::ClassA);
  CHECK(svm_predict(m, sv({{0, -2.0}}, 2)) == Label::ClassB);
  CHECK(svm_predict(m, sv({}, 2)) == Label::ClassA);  // margin exactly 0
  CHECK(svm_margin(m, sv({}, 2)) == 0.0);
}

TEST_CASE("input scaling with matched lambda keeps decisions at the sign level") {
  std::vector<SparseVector> x = {sv({{0, 1.0}}, 2), sv({{0, -1.0}}, 2),
                                 sv({{0, 0.9}, {1, 0.1}}, 2), sv({{0, -0.8}, {1, -0.2}}, 2)};
  std::vector<Label> y = {Label::ClassA, Label::ClassB, Label::ClassA, Label::ClassB};
  const double c = 10.0;
  std::vector<SparseVector> xs = x;
  for (auto& v : xs)
    for (double& val : v.values) val *= c;
  SvmModel base = svm_fit(x, y, {0.05, 40, 9});
  SvmModel scaled = svm_fit(xs, y, {0.05 * c * c, 40, 9});
  for (size_t i = 0; i < x.size(); ++i)
    CHECK(svm_predict(base, x[i]) == svm_predict(scaled, xs[i]));
}

TEST_CASE("knn nearest-neighbor basics") {
  std::vector<SparseVector> x = {sv({{0, 1.0}}, 2), sv({{1, 1.0}}, 2), sv({{0, -1.0}}, 2)};
  std::vector<Label> y = {Label::ClassA, Label::ClassA, Label::ClassB};
  KnnModel m1 = knn_fit(x, y, 1, KnnMetric::Euclidean);
  CHECK(knn_predict(m1, x[2]) == Label::ClassB);
  KnnModel m3 = knn_fit(x, y, 3, KnnMetric::Euclidean);
  CHECK(knn_predict(m3, sv({{0, 0.5}}, 2)) == Label::ClassA);  // votes A,A,B
}

TEST_CASE("knn vote tie goes to ClassA and distance ties to the lower index") {
  std::vector<SparseVector> x = {sv({{0, 1.0}}, 2), sv({{0, -1.0}}, 2)};
  std::vector<Label> y = {Label::ClassA, Label::ClassB};
  KnnModel m = knn_fit(x, y, 2, KnnMetric::Euclidean);
  CHECK(knn_predict(m, sv({}, 2)) == Label::ClassA);  // both at distance 1

  std::vector<Label> flipped = {Label::ClassB, Label::ClassA};
  KnnModel m1 = knn_fit(x, flipped, 1, KnnMetric::Euclidean);
  CHECK(knn_predict(m1, sv({}, 2)) == Label::ClassB);  // index 0 wins the tie
}

TEST_CASE("knn with k equal to the training size returns the global majority") {
  Rng rng(13);
  std::vector<SparseVector> x;
  std::vector<Label> y;
  for (int i = 0; i < 9; ++i) {
    x.push_back(sv({{0, rng.next_real(-2, 2)}, {1, rng.next_real(-2, 2)}}, 2));
    y.push_back(i < 5 ? Label::ClassB : Label::ClassA);
  }
  KnnModel m = knn_fit(x, y, 9, KnnMetric::Cosine);
  for (int q = 0; q < 5; ++q) {
    SparseVector query = sv({{0, rng.next_real(-2, 2)}, {1, rng.next_real(-2, 2)}}, 2);
    CHECK(knn_predict(m, query) == Label::ClassB);
  }
}

TEST_CASE("knn validates k against the training size") {
  std::vector<SparseVector> x = {sv({{0, 1.0}}, 1), sv({{0, 2.0}}, 1)};
  std::vector<Label> y = {Label::ClassA, Label::ClassB};
  CHECK_THROWS_AS(knn_fit(x, y, 3, KnnMetric::Cosine), Error);
  CHECK_THROWS_AS(knn_fit(x, y, 0, KnnMetric::Cosine), Error);
}

TEST_CASE("tree splits one feature at the midpoint and classifies perfectly") {
  Matrix x(4, 1);
  x(0, 0) = 0.2;
  x(1, 0) = 0.4;
  x(2, 0) = 0.6;
  x(3, 0) = 0.8;
  std::vector<Label> y = {Label::ClassA, Label::ClassA, Label::ClassB, Label::ClassB};
  TreeModel m = tree_fit(x, y, 10, 2);
  REQUIRE(m.nodes.size() == 3);
  CHECK(m.nodes[0].feature == 0);
  CHECK(m.nodes[0].threshold == doctest::Approx(0.5));
  for (size_t i = 0; i < 4; ++i) CHECK(tree_predict(m, x.row(i)) == y[i]);
}

TEST_CASE("pure labels produce a single leaf") {
  Matrix x(3, 2);
  x(0, 0) = 1;
  x(1, 0) = 2;
  x(2, 0) = 3;
  std::vector<Label> y(3, Label::ClassB);
  TreeModel m = tree_fit(x, y, 10, 1);
  CHECK(m.nodes.size() == 1);
  CHECK(m.nodes[0].feature == -1);
  CHECK(tree_predict(m, x.row(0)) == Label::ClassB);
}

TEST_CASE("max_depth zero yields a majority stump") {
  Matrix x(3, 1);
  x(0, 0) = 0.0;
  x(1, 0) = 1.0;
  x(2, 0) = 2.0;
  std::vector<Label> y = {Label::ClassB, Label::ClassB, Label::ClassA};
  TreeModel m = tree_fit(x, y, 0, 1);
  CHECK(m.nodes.size() == 1);
  CHECK(tree_predict(m, x.row(2)) == Label::ClassB);
  CHECK(tree_score(m, x.row(0)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("consistent data trains to perfect accuracy with unbounded depth") {
  Rng rng(23);
  for (int round = 0; round < 5; ++round) {
    size_t n = 8 + rng.next_below(20);
    Matrix x(n, 2);
    std::vector<Label> y;
    for (size_t i = 0; i < n; ++i) {
      x(i, 0) = static_cast<double>(i);  // distinct, so labels are consistent
      x(i, 1) = rng.next_real(-1, 1);
      y.push_back(rng.next_below(2) ? Label::ClassA : Label::ClassB);
    }
    TreeModel m = tree_fit(x, y, 64, 1);
    for (size_t i = 0; i < n; ++i) CHECK(tree_predict(m, x.row(i)) == y[i]);
  }
}

TEST_CASE("equal-gain splits choose the lowest feature index") {
  Matrix x(4, 2);
  for (size_t i = 0; i < 4; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = static_cast<double>(i);  // identical column
  }
  std::vector<Label> y = {Label::ClassA, Label::ClassA, Label::ClassB, Label::ClassB};
  TreeModel m = tree_fit(x, y, 5, 1);
  CHECK(m.nodes[0].feature == 0);
}

TEST_CASE("classic models round trip through their containers") {
  std::filesystem::path dir = std::filesystem::temp_directory_path();
  std::vector<SparseVector> x = {sv({{0, 2.0}}, 2), sv({{1, 3.0}}, 2), sv({{0, 1.0}}, 2),
                                 sv({{1, 1.0}}, 2)};
  std::vector<Label> y = {Label::ClassA, Label::ClassB, Label::ClassA, Label::ClassB};

  NbModel nb = nb_fit(x, y, 0.7);
  auto nb_path = (dir / "stylus_nb.bin").string();
  save_nb(nb, nb_path);
  NbModel nb_back = load_nb(nb_path);
  CHECK(nb_back.log_prior == nb.log_prior);
  CHECK(nb_back.log_likelihood.data == nb.log_likelihood.data);
  CHECK(nb_back.alpha == nb.alpha);

  NbModel gnb = gaussian_nb_fit(x, y);
  save_nb(gnb, nb_path);
  NbModel gnb_back = load_nb(nb_path);
  CHECK(gnb_back.gaussian);
  CHECK(gnb_back.mean.data == gnb.mean.data);
  CHECK(gnb_back.variance.data == gnb.variance.data);

  SvmModel svm = svm_fit(x, y, {0.1, 5, 2});
  auto svm_path = (dir / "stylus_svm.bin").string();
  save_svm(svm, svm_path);
  SvmModel svm_back = load_svm(svm_path);
  CHECK(svm_back.weight == svm.weight);
  CHECK(svm_back.bias == svm.bias);

  KnnModel knn = knn_fit(x, y, 3, KnnMetric::Euclidean);
  auto knn_path = (dir / "stylus_knn.bin").string();
  save_knn(knn, knn_path);
  KnnModel knn_back = load_knn(knn_path);
  CHECK(knn_back.k == 3);
  CHECK(knn_back.metric == KnnMetric::Euclidean);
  CHECK(knn_back.x.size() == 4);
  CHECK(knn_predict(knn_back, x[0]) == knn_predict(knn, x[0]));

  Matrix dense(4, 2);
  for (size_t i = 0; i < 4; ++i) {
    auto row = sparse_to_dense(x[i], 2);
    std::copy(row.begin(), row.end(), dense.row(i));
  }
  TreeModel tree = tree_fit(dense, y, 5, 1);
  auto tree_path = (dir / "stylus_tree.bin").string();
  save_tree(tree, tree_path);
  TreeModel tree_back = load_tree(tree_path);
  REQUIRE(tree_back.nodes.size() == tree.nodes.size());
  for (size_t i = 0; i < 4; ++i)
    CHECK(tree_predict(tree_back, dense.row(i)) == tree_predict(tree, dense.row(i)));

  for (const auto& p : {nb_path, svm_path, knn_path, tree_path}) std::filesystem::remove(p);
}

TEST_CASE("ranking scores sit where the contracts put them") {
  // symmetric NB
  std::vector<SparseVector> x = {sv({{0, 1.0}}, 2), sv({{1, 1.0}}, 2)};
  std::vector<Label> y = {Label::ClassA, Label::ClassB};
  NbModel nb = nb_fit(x, y, 1.0);
  CHECK(nb_score(nb, sv({}, 2)) == doctest::Approx(0.5).epsilon(1e-12));
  // KNN with all-ClassA neighborhood
  std::vector<SparseVector> kx = {sv({{0, 1.0}}, 1), sv({{0, 1.1}}, 1), sv({{0, 0.9}}, 1),
                                  sv({{0, -5.0}}, 1)};
  std::vector<Label> ky = {Label::ClassA, Label::ClassA, Label::ClassA, Label::ClassB};
  KnnModel knn = knn_fit(kx, ky, 3, KnnMetric::Euclidean);
  CHECK(knn_score(knn, sv({{0, 1.0}}, 1)) == doctest::Approx(1.0));
}

TEST_SUITE_END();
