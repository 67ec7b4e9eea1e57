#include <doctest.h>

#include <cmath>
#include <set>

#include "stylus/eval.hpp"
#include "stylus/rng.hpp"
#include "support/oracles.hpp"

using namespace stylus;
using namespace stylus::testsupport;

namespace {

std::vector<Label> balanced_labels(size_t n) {
  std::vector<Label> labels(n);
  for (size_t i = 0; i < n; ++i) labels[i] = i % 2 == 0 ? Label::ClassA : Label::ClassB;
  return labels;
}

// Cheap deterministic runner: metrics derived from the split shape alone.
FoldOutcome stub_outcome(size_t fold, uint64_t seed, const FoldSplit& split) {
  FoldOutcome out;
  out.test.accuracy =
      static_cast<double>((seed % 1000) + fold + split.test.size()) / 2000.0;
  out.test.f1 = out.test.accuracy / 2;
  out.verification.accuracy = out.test.accuracy / 3;
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("eval");

TEST_CASE("metrics match hand arithmetic") {
  MetricSet perfect = metrics({5, 0, 5, 0});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  MetricSet degenerate = metrics({0, 0, 4, 2});
  CHECK(degenerate.precision == 0.0);
  CHECK_FALSE(degenerate.precision_defined);

  MetricSet m = metrics({3, 1, 4, 2});
  CHECK(m.accuracy == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(m.precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(0.6666666666666665).epsilon(1e-9));
}

TEST_CASE("metrics equal the brute-force oracle on random confusion matrices") {
  Rng rng(2024);
  for (int round = 0; round < 1000; ++round) {
    uint64_t tp = rng.next_below(50), fp = rng.next_below(50);
    uint64_t tn = rng.next_below(50), fn = rng.next_below(50);
    if (tp + fp + tn + fn == 0) continue;
    MetricSet got = metrics({tp, fp, tn, fn});
    OracleMetrics expected = oracle_metrics(tp, fp, tn, fn);
    CHECK(got.accuracy == expected.accuracy);
    CHECK(got.precision == expected.precision);
    CHECK(got.recall == expected.recall);
    CHECK(got.f1 == expected.f1);
  }
}

TEST_CASE("f1 variants cover macro and weighted definitions") {
  ConfusionMatrix cm{8, 2, 30, 10};
  MetricSet m = metrics(cm);
  OracleMetrics pos = oracle_metrics(cm.tp, cm.fp, cm.tn, cm.fn);
  OracleMetrics neg = oracle_metrics(cm.tn, cm.fn, cm.tp, cm.fp);
  CHECK(m.f1_negative == doctest::Approx(neg.f1).epsilon(1e-12));
  CHECK(m.f1_macro == doctest::Approx((pos.f1 + neg.f1) / 2).epsilon(1e-12));
  double weighted = (18.0 * pos.f1 + 32.0 * neg.f1) / 50.0;
  CHECK(m.f1_weighted == doctest::Approx(weighted).epsilon(1e-12));
}

TEST_CASE("auc handles the documented cases") {
  CHECK(auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
  CHECK(auc({0.5, 0.5, 0.5, 0.5}, {1, 1, 0, 0}) == 0.5);
  // pos 0.9 and 0.4, neg 0.6: one concordant, one discordant pair
  CHECK(auc({0.9, 0.4, 0.6}, {1, 1, 0}) == 0.5);
  CHECK(auc({0.3, 0.7}, {1, 0}) == 0.0);
}

TEST_CASE("auc equals pair enumeration exactly on random score sets") {
  Rng rng(555);
  for (int round = 0; round < 50; ++round) {
    size_t n = 2 + rng.next_below(49);
    std::vector<double> scores(n);
    std::vector<uint8_t> pos(n);
    bool has_pos = false, has_neg = false;
    for (size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.next_below(10)) / 10.0;  // force ties
      pos[i] = rng.next_below(2) ? 1 : 0;
      (pos[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    CHECK(auc(scores, pos) == oracle_auc(scores, pos));
  }
}

TEST_CASE("auc is invariant under strictly monotone score transforms") {
  Rng rng(777);
  std::vector<double> scores(40);
  std::vector<uint8_t> pos(40);
  for (size_t i = 0; i < 40; ++i) {
    scores[i] = rng.next_real(-2, 2);
    pos[i] = rng.next_below(2) ? 1 : 0;
  }
  pos[0] = 1;
  pos[1] = 0;
  double base = auc(scores, pos);
  auto transformed = scores;
  for (double& s : transformed) s = std::exp(s);
  CHECK(auc(transformed, pos) == base);
  for (size_t i = 0; i < 40; ++i) transformed[i] = 3.0 * scores[i] + 10.0;
  CHECK(auc(transformed, pos) == base);
}

TEST_CASE("evaluate_predictions orients auc by the positive class") {
  std::vector<Label> truth = {Label::ClassA, Label::ClassA, Label::ClassB, Label::ClassB};
  std::vector<Label> preds = truth;
  std::vector<double> scores = {0.9, 0.8, 0.2, 0.1};  // ClassA-oriented
  MetricSet for_a = evaluate_predictions(preds, scores, truth, Label::ClassA);
  MetricSet for_b = evaluate_predictions(preds, scores, truth, Label::ClassB);
  CHECK(for_a.auc == 1.0);
  CHECK(for_b.auc == 1.0);  // negated scores rank ClassB on top
  CHECK(for_a.accuracy == 1.0);
  CHECK(for_b.accuracy == 1.0);
}

TEST_CASE("paper-literal split takes tenths with a floor of one") {
  auto labels = balanced_labels(100);
  auto plan = make_split_plan(labels, 10, CvMode::PaperLiteral, 3);
  REQUIRE(plan.size() == 10);
  for (const auto& split : plan) {
    CHECK(split.test.size() == 1);
    CHECK(split.verification.size() == 1);
    CHECK(split.train.size() == 8);
  }
}

TEST_CASE("standard k-fold covers the corpus with disjoint folds") {
  auto labels = balanced_labels(53);
  auto plan = make_split_plan(labels, 10, CvMode::StandardKfold, 9);
  std::multiset<size_t> all_tests;
  size_t max_size = 0, min_size = SIZE_MAX;
  for (const auto& split : plan) {
    max_size = std::max(max_size, split.test.size());
    min_size = std::min(min_size, split.test.size());
    for (size_t i : split.test) all_tests.insert(i);
    std::set<size_t> train(split.train.begin(), split.train.end());
    for (size_t i : split.test) CHECK(train.count(i) == 0);
    for (size_t i : split.verification) CHECK(train.count(i) == 0);
    CHECK(split.train.size() + split.test.size() + split.verification.size() == labels.size());
  }
  CHECK(all_tests.size() == labels.size());
  CHECK(max_size - min_size <= 1);
}

TEST_CASE("split plans respect preconditions") {
  auto labels = balanced_labels(20);
  CHECK_THROWS_AS(make_split_plan(labels, 1, CvMode::StandardKfold, 0), Error);
  CHECK_THROWS_AS(make_split_plan(labels, 2, CvMode::StandardKfold, 0), Error);
  CHECK_THROWS_AS(make_split_plan(balanced_labels(5), 10, CvMode::StandardKfold, 0), Error);
  // paper-literal needs every group to afford test+verification+train
  CHECK_THROWS_AS(make_split_plan(balanced_labels(20), 10, CvMode::PaperLiteral, 0), Error);
}

TEST_CASE("stratified grouping balances classes and sizes") {
  std::vector<Label> labels;
  for (int i = 0; i < 30; ++i) labels.push_back(i < 10 ? Label::ClassA : Label::ClassB);
  auto plan = make_split_plan(labels, 5, CvMode::StandardKfold, 4, true);
  for (const auto& split : plan) {
    CHECK(split.test.size() == 6);
    size_t a = 0;
    for (size_t i : split.test)
      if (labels[i] == Label::ClassA) ++a;
    CHECK(a == 2);  // 10 ClassA over 5 groups
  }
}

TEST_CASE("cross_validate is deterministic and aggregation is exact") {
  auto labels = balanced_labels(60);
  auto run = [&](unsigned jobs) {
    return cross_validate(labels, 6, CvMode::StandardKfold, 42, stub_outcome, {}, false, jobs);
  };
  CvResult a = run(1), b = run(1), c = run(4);
  REQUIRE(a.fold_metrics.size() == 6);
  for (size_t i = 0; i < 6; ++i) {
    CHECK(a.fold_metrics[i].accuracy == b.fold_metrics[i].accuracy);
    CHECK(a.fold_metrics[i].accuracy == c.fold_metrics[i].accuracy);
    CHECK(a.splits[i].test == b.splits[i].test);
  }
  double mean = 0;
  for (const auto& m : a.fold_metrics) mean += m.accuracy;
  mean /= 6.0;
  CHECK(std::abs(a.mean.accuracy - mean) < 1e-12);
  double var = 0;
  for (const auto& m : a.fold_metrics) var += (m.accuracy - mean) * (m.accuracy - mean);
  CHECK(std::abs(a.stddev.accuracy - std::sqrt(var / 6.0)) < 1e-12);
  CHECK(a.fingerprint.at("cv_mode") == "standard");
  CHECK(a.fingerprint.at("seed") == "42");
}

TEST_CASE("fold seeds differ between folds but not between runs") {
  auto labels = balanced_labels(30);
  std::vector<uint64_t> seeds_first, seeds_second;
  auto collect = [&](std::vector<uint64_t>& sink) {
    return [&sink](size_t, uint64_t fold_seed, const FoldSplit&) {
      sink.push_back(fold_seed);
      return FoldOutcome{};
    };
  };
  cross_validate(labels, 3, CvMode::StandardKfold, 7, collect(seeds_first), {});
  cross_validate(labels, 3, CvMode::StandardKfold, 7, collect(seeds_second), {});
  CHECK(seeds_first == seeds_second);
  CHECK(seeds_first[0] != seeds_first[1]);
  CHECK(seeds_first[1] != seeds_first[2]);
}

TEST_CASE("repeat_runs averages run means and varies the seed") {
  auto labels = balanced_labels(40);
  auto one_run = [&](uint64_t seed) {
    return cross_validate(labels, 4, CvMode::StandardKfold, seed, stub_outcome, {});
  };
  RepeatedResult single = repeat_runs(1, 11, one_run);
  CvResult direct = one_run(11);
  CHECK(single.runs.size() == 1);
  CHECK(single.grand_mean.accuracy == direct.mean.accuracy);

  RepeatedResult rep = repeat_runs(5, 100, one_run);
  REQUIRE(rep.runs.size() == 5);
  double mean = 0;
  for (const auto& r : rep.runs) mean += r.mean.accuracy;
  mean /= 5.0;
  CHECK(std::abs(rep.grand_mean.accuracy - mean) < 1e-12);
  CHECK(rep.runs[0].fingerprint.at("seed") == "100");
  CHECK(rep.runs[4].fingerprint.at("seed") == "104");
}

TEST_CASE("report renders grids with fixed row and column order") {
  CvResult nb;
  nb.fingerprint = {{"model", "nb"}, {"features", "tfidf"}};
  nb.mean.accuracy = 0.7782;
  nb.mean.f1 = 0.8591;
  CvResult lstm;
  lstm.fingerprint = {{"model", "lstm"},
                      {"features", "embedding"},
                      {"embedding_arch", "cbow"},
                      {"embedding_trainable", "false"}};
  lstm.mean.accuracy = 0.7;
  lstm.mean.f1 = 0.75;

  std::string md = render_report({nb, lstm}, ReportFormat::Markdown);
  CHECK(md.find("| model | stylometric | tfidf | lexicon | embedding |") != std::string::npos);
  CHECK(md.find("| NB | - | 77.82 / 85.91 | - | - |") != std::string::npos);
  CHECK(md.find("| LSTM | - | - | - | 70.00 / 75.00 |") != std::string::npos);
  CHECK(md.find("| CBOW | - | 70.00 / 75.00 |") != std::string::npos);
  // LSTM rows print before NB rows
  CHECK(md.find("| LSTM |") < md.find("| NB |"));
  // paper-reported reference block is always present and labeled
  CHECK(md.find("paper-reported") != std::string::npos);
  CHECK(md.find("77.82") != std::string::npos);
  CHECK(md.find("76.28") != std::string::npos);
  CHECK(md.find("85.91") != std::string::npos);

  std::string empty_md = render_report({}, ReportFormat::Markdown);
  CHECK(empty_md.find("| model |") != std::string::npos);
  CHECK(empty_md.find("| NB |") == std::string::npos);  // no grid rows, reference only

  std::string csv = render_report({nb}, ReportFormat::Csv);
  CHECK(csv.find("model,scheme,accuracy,f1") == 0);
  CHECK(csv.find("nb,tfidf,77.82,85.91") != std::string::npos);
}

TEST_CASE("result files round trip through json") {
  auto labels = balanced_labels(40);
  auto one_run = [&](uint64_t seed) {
    return cross_validate(labels, 4, CvMode::StandardKfold, seed, stub_outcome,
                          {{"model", "nb"}, {"features", "tfidf"}});
  };
  ResultFile rf;
  rf.result = repeat_runs(2, 5, one_run);
  rf.config = {{"model", "nb"}, {"features", "tfidf"}, {"runs", "2"}};
  std::string json = result_file_json(rf);
  ResultFile back = parse_result_file(json);
  CHECK(back.config.at("model") == "nb");
  REQUIRE(back.result.runs.size() == 2);
  CHECK(back.result.runs[0].fold_metrics.size() == 4);
  CHECK(back.result.runs[0].mean.accuracy == rf.result.runs[0].mean.accuracy);
  CHECK(back.result.grand_mean.accuracy == rf.result.grand_mean.accuracy);
}

TEST_SUITE_END();
