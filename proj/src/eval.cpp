#include "stylus/eval.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "stylus/rng.hpp"

namespace stylus {

namespace {

struct Prf {
  double precision = 0, recall = 0, f1 = 0;
  bool precision_defined = true, recall_defined = true;
};

Prf prf(uint64_t tp, uint64_t fp, uint64_t fn) {
  Prf r;
  if (tp + fp == 0) {
    r.precision_defined = false;
  } else {
    r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    r.recall_defined = false;
  } else {
    r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  if (r.precision + r.recall > 0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

}  // namespace

MetricSet metrics(const ConfusionMatrix& cm) {
  MetricSet m;
  uint64_t n = cm.total();
  m.accuracy = n > 0 ? static_cast<double>(cm.tp + cm.tn) / static_cast<double>(n) : 0.0;
  Prf pos = prf(cm.tp, cm.fp, cm.fn);
  Prf neg = prf(cm.tn, cm.fn, cm.fp);
  m.precision = pos.precision;
  m.recall = pos.recall;
  m.f1 = pos.f1;
  m.precision_defined = pos.precision_defined;
  m.recall_defined = pos.recall_defined;
  m.f1_negative = neg.f1;
  m.f1_macro = (pos.f1 + neg.f1) / 2.0;
  uint64_t pos_n = cm.tp + cm.fn, neg_n = cm.tn + cm.fp;
  m.f1_weighted = n > 0 ? (static_cast<double>(pos_n) * pos.f1 +
                           static_cast<double>(neg_n) * neg.f1) /
                              static_cast<double>(n)
                        : 0.0;
  m.auc = 0.0;
  m.auc_defined = false;
  return m;
}

double auc(const std::vector<double>& scores, const std::vector<uint8_t>& is_positive) {
  if (scores.size() != is_positive.size())
    fail(ErrorCode::ShapeMismatch, "auc needs parallel scores and labels");
  uint64_t twice_concordant = 0, pos_count = 0, neg_count = 0;
  for (size_t i = 0; i < scores.size(); ++i) (is_positive[i] ? pos_count : neg_count) += 1;
  if (pos_count == 0 || neg_count == 0) return 0.5;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!is_positive[i]) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (is_positive[j]) continue;
      if (scores[i] > scores[j]) twice_concordant += 2;
      else if (scores[i] == scores[j]) twice_concordant += 1;
    }
  }
  return static_cast<double>(twice_concordant) / (2.0 * static_cast<double>(pos_count) *
                                                  static_cast<double>(neg_count));
}

ConfusionMatrix confusion(const std::vector<Label>& predictions, const std::vector<Label>& truth,
                          Label positive) {
  if (predictions.size() != truth.size())
    fail(ErrorCode::ShapeMismatch, "predictions/truth size mismatch");
  ConfusionMatrix cm;
  for (size_t i = 0; i < truth.size(); ++i) {
    bool actual_pos = truth[i] == positive;
    bool pred_pos = predictions[i] == positive;
    if (actual_pos && pred_pos) ++cm.tp;
    else if (!actual_pos && pred_pos) ++cm.fp;
    else if (actual_pos && !pred_pos) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

MetricSet evaluate_predictions(const std::vector<Label>& predictions,
                               const std::vector<double>& scores_class_a,
                               const std::vector<Label>& truth, Label positive) {
  MetricSet m = metrics(confusion(predictions, truth, positive));
  std::vector<double> oriented(scores_class_a);
  if (positive == Label::ClassB)
    for (double& s : oriented) s = -s;
  std::vector<uint8_t> is_pos(truth.size());
  bool any_pos = false, any_neg = false;
  for (size_t i = 0; i < truth.size(); ++i) {
    is_pos[i] = truth[i] == positive ? 1 : 0;
    (is_pos[i] ? any_pos : any_neg) = true;
  }
  m.auc_defined = any_pos && any_neg;
  m.auc = m.auc_defined ? auc(oriented, is_pos) : 0.5;
  return m;
}

namespace {

std::vector<std::vector<size_t>> group_indices(const std::vector<Label>& labels, size_t k,
                                               uint64_t seed, bool stratify) {
  size_t n = labels.size();
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  fisher_yates(perm, rng);

  std::vector<std::vector<size_t>> groups(k);
  if (!stratify) {
    size_t base = n / k, extra = n % k, offset = 0;
    for (size_t g = 0; g < k; ++g) {
      size_t len = base + (g < extra ? 1 : 0);
      groups[g].assign(perm.begin() + static_cast<ptrdiff_t>(offset),
                       perm.begin() + static_cast<ptrdiff_t>(offset + len));
      offset += len;
    }
    return groups;
  }
  // Per-class round-robin deal into capacity-limited groups: class balance
  // within one document per group, and group sizes still differ by <= 1.
  std::vector<size_t> capacity(k, n / k);
  for (size_t g = 0; g < n % k; ++g) ++capacity[g];
  std::array<std::vector<size_t>, 2> by_class;
  for (size_t i : perm) by_class[label_index(labels[i])].push_back(i);
  size_t cursor = 0;
  for (const auto& members : by_class) {
    for (size_t i : members) {
      while (groups[cursor % k].size() >= capacity[cursor % k]) ++cursor;
      groups[cursor % k].push_back(i);
      ++cursor;
    }
  }
  // Interleave the classes evenly inside each group, so the literal mode's
  // contiguous 80/10/10 slices stay mixed instead of starting with one class.
  for (auto& group : groups) {
    std::array<std::vector<size_t>, 2> parts;
    for (size_t i : group) parts[label_index(labels[i])].push_back(i);
    std::vector<std::pair<double, size_t>> keyed;
    keyed.reserve(group.size());
    for (const auto& part : parts) {
      for (size_t j = 0; j < part.size(); ++j)
        keyed.emplace_back((static_cast<double>(j) + 0.5) / static_cast<double>(part.size()),
                           part[j]);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t j = 0; j < group.size(); ++j) group[j] = keyed[j].second;
  }
  return groups;
}

}  // namespace

std::vector<FoldSplit> make_split_plan(const std::vector<Label>& labels, size_t k, CvMode mode,
                                       uint64_t seed, bool stratify) {
  size_t n = labels.size();
  if (k < 2) fail(ErrorCode::InvalidArgument, "cross-validation needs k >= 2");
  if (mode == CvMode::StandardKfold && k < 3)
    fail(ErrorCode::InvalidArgument, "standard k-fold with a verification fold needs k >= 3");
  if (n < k) fail(ErrorCode::TooFewDocuments, "need at least k documents");

  auto groups = group_indices(labels, k, seed, stratify);
  std::vector<FoldSplit> plan;
  plan.reserve(k);
  for (size_t i = 0; i < k; ++i) {
    FoldSplit split;
    if (mode == CvMode::PaperLiteral) {
      const auto& g = groups[i];
      size_t tenth = std::max<size_t>(1, g.size() / 10);
      if (g.size() < 2 * tenth + 1)
        fail(ErrorCode::TooFewDocuments,
             "group of " + std::to_string(g.size()) + " documents cannot be split 80/10/10");
      split.test.assign(g.begin(), g.begin() + static_cast<ptrdiff_t>(tenth));
      split.verification.assign(g.begin() + static_cast<ptrdiff_t>(tenth),
                                g.begin() + static_cast<ptrdiff_t>(2 * tenth));
      split.train.assign(g.begin() + static_cast<ptrdiff_t>(2 * tenth), g.end());
    } else {
      split.test = groups[i];
      split.verification = groups[(i + 1) % k];
      for (size_t g = 0; g < k; ++g) {
        if (g == i || g == (i + 1) % k) continue;
        split.train.insert(split.train.end(), groups[g].begin(), groups[g].end());
      }
    }
    plan.push_back(std::move(split));
  }
  return plan;
}

MetricSet mean_metrics(const std::vector<MetricSet>& sets) {
  MetricSet m;
  if (sets.empty()) return m;
  for (const auto& s : sets) {
    m.accuracy += s.accuracy;
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
    m.auc += s.auc;
    m.f1_negative += s.f1_negative;
    m.f1_macro += s.f1_macro;
    m.f1_weighted += s.f1_weighted;
    m.precision_defined = m.precision_defined && s.precision_defined;
    m.recall_defined = m.recall_defined && s.recall_defined;
    m.auc_defined = m.auc_defined && s.auc_defined;
  }
  double inv = 1.0 / static_cast<double>(sets.size());
  m.accuracy *= inv;
  m.precision *= inv;
  m.recall *= inv;
  m.f1 *= inv;
  m.auc *= inv;
  m.f1_negative *= inv;
  m.f1_macro *= inv;
  m.f1_weighted *= inv;
  return m;
}

MetricSet std_metrics(const std::vector<MetricSet>& sets, const MetricSet& mean) {
  MetricSet s;
  if (sets.size() < 1) return s;
  auto accum = [&](double MetricSet::*field) {
    double acc = 0;
    for (const auto& x : sets) {
      double d = x.*field - mean.*field;
      acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(sets.size()));
  };
  s.accuracy = accum(&MetricSet::accuracy);
  s.precision = accum(&MetricSet::precision);
  s.recall = accum(&MetricSet::recall);
  s.f1 = accum(&MetricSet::f1);
  s.auc = accum(&MetricSet::auc);
  s.f1_negative = accum(&MetricSet::f1_negative);
  s.f1_macro = accum(&MetricSet::f1_macro);
  s.f1_weighted = accum(&MetricSet::f1_weighted);
  return s;
}

CvResult cross_validate(const std::vector<Label>& labels, size_t k, CvMode mode, uint64_t seed,
                        const FoldRunner& runner,
                        std::map<std::string, std::string> fingerprint, bool stratify,
                        unsigned jobs) {
  CvResult result;
  result.splits = make_split_plan(labels, k, mode, seed, stratify);
  result.fingerprint = std::move(fingerprint);
  result.fingerprint.emplace("folds", std::to_string(k));
  result.fingerprint.emplace("cv_mode", mode == CvMode::PaperLiteral ? "paper-literal" : "standard");
  result.fingerprint.emplace("seed", std::to_string(seed));

  result.fold_metrics.resize(k);
  result.verification_metrics.resize(k);
  auto run_fold = [&](size_t i) {
    FoldOutcome out = runner(i, derive_seed(seed, 1000 + i), result.splits[i]);
    result.fold_metrics[i] = out.test;
    result.verification_metrics[i] = out.verification;
  };

  if (jobs <= 1 || k <= 1) {
    for (size_t i = 0; i < k; ++i) run_fold(i);
  } else {
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    size_t workers = std::min<size_t>(jobs, k);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          size_t i = next.fetch_add(1);
          if (i >= k) return;
          try {
            run_fold(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  result.mean = mean_metrics(result.fold_metrics);
  result.stddev = std_metrics(result.fold_metrics, result.mean);
  return result;
}

RepeatedResult repeat_runs(size_t runs, uint64_t base_seed,
                           const std::function<CvResult(uint64_t seed)>& one_run) {
  if (runs < 1) fail(ErrorCode::InvalidArgument, "runs must be >= 1");
  RepeatedResult rep;
  rep.runs.reserve(runs);
  std::vector<MetricSet> run_means;
  for (size_t r = 0; r < runs; ++r) {
    rep.runs.push_back(one_run(base_seed + r));
    run_means.push_back(rep.runs.back().mean);
  }
  rep.grand_mean = mean_metrics(run_means);
  rep.grand_std = std_metrics(run_means, rep.grand_mean);
  return rep;
}

namespace {

const std::vector<std::pair<std::string, std::string>> kModelRows = {
    {"lstm", "LSTM"}, {"gru", "GRU"}, {"svm", "SVM"},
    {"nb", "NB"},     {"knn", "KNN"}, {"tree", "DT"},
};
const std::vector<std::pair<std::string, std::string>> kSchemeCols = {
    {"stylometric", "stylometric"},
    {"tfidf", "tfidf"},
    {"lexicon", "lexicon"},
    {"embedding", "embedding"},
};

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
  return buf;
}

std::string cell_text(const CvResult* r) {
  if (!r) return "-";
  return pct(r->mean.accuracy) + " / " + pct(r->mean.f1);
}

std::string fp_get(const CvResult& r, const std::string& key) {
  auto it = r.fingerprint.find(key);
  return it == r.fingerprint.end() ? std::string() : it->second;
}

struct ReportGrids {
  std::map<std::pair<std::string, std::string>, const CvResult*> main;  // (model, scheme)
  std::map<std::pair<std::string, std::string>, const CvResult*> w2v;   // (arch, weights)
};

ReportGrids collect(const std::vector<CvResult>& results) {
  ReportGrids g;
  for (const auto& r : results) {
    std::string model = fp_get(r, "model");
    std::string scheme = fp_get(r, "features");
    if (!model.empty() && !scheme.empty()) g.main[{model, scheme}] = &r;
    std::string arch = fp_get(r, "embedding_arch");
    if (!arch.empty()) {
      std::string weights = fp_get(r, "embedding_trainable") == "true" ? "trainable" : "frozen";
      g.w2v[{arch, weights}] = &r;
    }
  }
  return g;
}

}  // namespace

std::string render_report(const std::vector<CvResult>& results, ReportFormat format) {
  ReportGrids grids = collect(results);
  auto main_cell = [&](const std::string& model, const std::string& scheme) {
    auto it = grids.main.find({model, scheme});
    return it == grids.main.end() ? nullptr : it->second;
  };
  auto w2v_cell = [&](const std::string& arch, const std::string& weights) {
    auto it = grids.w2v.find({arch, weights});
    return it == grids.w2v.end() ? nullptr : it->second;
  };

  if (format == ReportFormat::Markdown) {
    std::ostringstream out;
    out << "# Evaluation report\n\n";
    out << "Cells show mean accuracy / F1 in percent (positive-class F1).\n\n";
    out << "| model |";
    for (const auto& [key, name] : kSchemeCols) out << ' ' << name << " |";
    out << '\n';
    out << "|---|";
    for (size_t i = 0; i < kSchemeCols.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& [mkey, mname] : kModelRows) {
      bool any = false;
      for (const auto& [skey, sname] : kSchemeCols)
        if (main_cell(mkey, skey)) any = true;
      if (!any) continue;
      out << "| " << mname << " |";
      for (const auto& [skey, sname] : kSchemeCols)
        out << ' ' << cell_text(main_cell(mkey, skey)) << " |";
      out << '\n';
    }
    out << "\n## word2vec weight schemes\n\n";
    out << "| arch | trainable | frozen |\n|---|---|---|\n";
    for (const std::string arch : {"cbow", "sg"}) {
      const CvResult* tr = w2v_cell(arch, "trainable");
      const CvResult* fr = w2v_cell(arch, "frozen");
      if (!tr && !fr) continue;
      out << "| " << (arch == std::string("cbow") ? "CBOW" : "SG") << " | " << cell_text(tr)
          << " | " << cell_text(fr) << " |\n";
    }
    out << "\n## Reference values (paper-reported)\n\n";
    out << "Reported by the original study on its private corpus; reference points only,\n";
    out << "not outputs of this toolkit.\n\n";
    out << "| reference | accuracy | f1 |\n|---|---|---|\n";
    out << "| NB + tfidf (paper-reported) | 77.82 | - |\n";
    out << "| best configuration (paper-reported) | 76.28 | 85.91 |\n";
    return out.str();
  }

  if (format == ReportFormat::Csv) {
    std::ostringstream out;
    out << "model,scheme,accuracy,f1,f1_macro,f1_weighted,auc\n";
    for (const auto& [mkey, mname] : kModelRows) {
      for (const auto& [skey, sname] : kSchemeCols) {
        const CvResult* r = main_cell(mkey, skey);
        if (!r) continue;
        out << mkey << ',' << skey << ',' << pct(r->mean.accuracy) << ',' << pct(r->mean.f1)
            << ',' << pct(r->mean.f1_macro) << ',' << pct(r->mean.f1_weighted) << ','
            << pct(r->mean.auc) << '\n';
      }
    }
    return out.str();
  }

  nlohmann::ordered_json j;
  j["grid"] = nlohmann::ordered_json::array();
  for (const auto& [mkey, mname] : kModelRows) {
    for (const auto& [skey, sname] : kSchemeCols) {
      const CvResult* r = main_cell(mkey, skey);
      if (!r) continue;
      nlohmann::ordered_json cell;
      cell["model"] = mkey;
      cell["features"] = skey;
      cell["accuracy"] = r->mean.accuracy;
      cell["f1"] = r->mean.f1;
      cell["f1_macro"] = r->mean.f1_macro;
      cell["f1_weighted"] = r->mean.f1_weighted;
      cell["auc"] = r->mean.auc;
      j["grid"].push_back(cell);
    }
  }
  j["word2vec"] = nlohmann::ordered_json::array();
  for (const std::string arch : {"cbow", "sg"}) {
    for (const std::string weights : {"trainable", "frozen"}) {
      const CvResult* r = w2v_cell(arch, weights);
      if (!r) continue;
      nlohmann::ordered_json cell;
      cell["arch"] = arch;
      cell["weights"] = weights;
      cell["accuracy"] = r->mean.accuracy;
      cell["f1"] = r->mean.f1;
      j["word2vec"].push_back(cell);
    }
  }
  j["reference"] = nlohmann::ordered_json::array();
  j["reference"].push_back({{"name", "NB + tfidf"},
                            {"accuracy", 77.82},
                            {"source", "paper-reported"}});
  j["reference"].push_back({{"name", "best configuration"},
                            {"accuracy", 76.28},
                            {"f1", 85.91},
                            {"source", "paper-reported"}});
  return j.dump(2) + "\n";
}

namespace {

nlohmann::ordered_json metric_json(const MetricSet& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["f1_negative"] = m.f1_negative;
  j["f1_macro"] = m.f1_macro;
  j["f1_weighted"] = m.f1_weighted;
  j["auc"] = m.auc;
  j["precision_defined"] = m.precision_defined;
  j["recall_defined"] = m.recall_defined;
  j["auc_defined"] = m.auc_defined;
  return j;
}

MetricSet metric_from_json(const nlohmann::json& j) {
  MetricSet m;
  m.accuracy = j.at("accuracy").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.f1_negative = j.at("f1_negative").get<double>();
  m.f1_macro = j.at("f1_macro").get<double>();
  m.f1_weighted = j.at("f1_weighted").get<double>();
  m.auc = j.at("auc").get<double>();
  m.precision_defined = j.at("precision_defined").get<bool>();
  m.recall_defined = j.at("recall_defined").get<bool>();
  m.auc_defined = j.at("auc_defined").get<bool>();
  return m;
}

}  // namespace

std::string result_file_json(const ResultFile& rf) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rf.config) j["config"][k] = v;
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& run : rf.result.runs) {
    nlohmann::ordered_json rj;
    rj["fingerprint"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : run.fingerprint) rj["fingerprint"][k] = v;
    rj["folds"] = nlohmann::ordered_json::array();
    for (const auto& f : run.fold_metrics) rj["folds"].push_back(metric_json(f));
    rj["verification"] = nlohmann::ordered_json::array();
    for (const auto& f : run.verification_metrics) rj["verification"].push_back(metric_json(f));
    rj["mean"] = metric_json(run.mean);
    rj["std"] = metric_json(run.stddev);
    j["runs"].push_back(rj);
  }
  j["grand_mean"] = metric_json(rf.result.grand_mean);
  j["grand_std"] = metric_json(rf.result.grand_std);
  return j.dump(2) + "\n";
}

ResultFile parse_result_file(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::MalformedRecord, "invalid result json");
  ResultFile rf;
  for (const auto& [k, v] : j.at("config").items()) rf.config[k] = v.get<std::string>();
  for (const auto& rj : j.at("runs")) {
    CvResult run;
    if (rj.contains("fingerprint"))
      for (const auto& [k, v] : rj.at("fingerprint").items())
        run.fingerprint[k] = v.get<std::string>();
    for (const auto& f : rj.at("folds")) run.fold_metrics.push_back(metric_from_json(f));
    for (const auto& f : rj.at("verification"))
      run.verification_metrics.push_back(metric_from_json(f));
    run.mean = metric_from_json(rj.at("mean"));
    run.stddev = metric_from_json(rj.at("std"));
    rf.result.runs.push_back(std::move(run));
  }
  rf.result.grand_mean = metric_from_json(j.at("grand_mean"));
  rf.result.grand_std = metric_from_json(j.at("grand_std"));
  return rf;
}

}  // namespace stylus
