#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "stylus/common.hpp"

namespace stylus {

// Confusion counts relative to a chosen positive class.
struct ConfusionMatrix {
  uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  uint64_t total() const { return tp + fp + tn + fn; }
};

struct MetricSet {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0, auc = 0;
  double f1_negative = 0;  // the other class's F1
  double f1_macro = 0, f1_weighted = 0;
  bool precision_defined = true, recall_defined = true, auc_defined = true;
};

// accuracy, precision, recall and the three F1 variants; auc is left at 0
// (flagged undefined) because it needs scores, not counts.
MetricSet metrics(const ConfusionMatrix& cm);

// Mann-Whitney statistic by exact pair enumeration:
// (2*concordant + ties) / (2*P*N). Returns 0.5 flagged undefined when one
// class is absent.
double auc(const std::vector<double>& scores, const std::vector<uint8_t>& is_positive);

ConfusionMatrix confusion(const std::vector<Label>& predictions, const std::vector<Label>& truth,
                          Label positive);

// Full metric set from raw predictions plus ranking scores. `scores` are
// oriented toward ClassA and re-oriented internally when the positive class
// is ClassB.
MetricSet evaluate_predictions(const std::vector<Label>& predictions,
                               const std::vector<double>& scores_class_a,
                               const std::vector<Label>& truth, Label positive);

enum class CvMode { PaperLiteral, StandardKfold };

struct FoldSplit {
  std::vector<size_t> train, verification, test;  // indices into the corpus
};

// Seeded shuffle + contiguous grouping (earliest groups take the remainder),
// then either mode's split rule:
//   PaperLiteral   each group splits internally into test/verification/train
//                  of max(1, |g|/10) / max(1, |g|/10) / remainder documents.
//   StandardKfold  group i is the test set, group (i+1) mod k verification,
//                  everything else trains. Needs k >= 3.
// With stratify=true the shuffled documents are dealt into groups round-robin
// per class instead of contiguously.
std::vector<FoldSplit> make_split_plan(const std::vector<Label>& labels, size_t k, CvMode mode,
                                       uint64_t seed, bool stratify = false);

struct FoldOutcome {
  MetricSet test;
  MetricSet verification;
};

using FoldRunner = std::function<FoldOutcome(size_t fold_index, uint64_t fold_seed,
                                             const FoldSplit& split)>;

struct CvResult {
  std::map<std::string, std::string> fingerprint;
  std::vector<FoldSplit> splits;
  std::vector<MetricSet> fold_metrics;
  std::vector<MetricSet> verification_metrics;  // recorded, never used for selection
  MetricSet mean, stddev;
};

// Runs the fold runner over the split plan. Fold seeds derive from `seed`
// and the fold index alone, so results are identical for any `jobs` count;
// jobs > 1 executes folds on a thread pool.
CvResult cross_validate(const std::vector<Label>& labels, size_t k, CvMode mode, uint64_t seed,
                        const FoldRunner& runner,
                        std::map<std::string, std::string> fingerprint, bool stratify = false,
                        unsigned jobs = 1);

struct RepeatedResult {
  std::vector<CvResult> runs;  // run r uses seed base_seed + r
  MetricSet grand_mean, grand_std;
};

RepeatedResult repeat_runs(size_t runs, uint64_t base_seed,
                           const std::function<CvResult(uint64_t seed)>& one_run);

MetricSet mean_metrics(const std::vector<MetricSet>& sets);
MetricSet std_metrics(const std::vector<MetricSet>& sets, const MetricSet& mean);

// Grid renderers: rows LSTM,GRU,SVM,NB,KNN,DT x columns
// stylometric,tfidf,lexicon,embedding, cells "accuracy / F1" in percent,
// plus a CBOW/SG x trainable/frozen grid for runs that carry embedding
// fingerprints, plus the fixed reference numbers reported by the original
// study ("paper-reported", not produced by this toolkit). When several
// results land on one cell the last one wins.
enum class ReportFormat { Markdown, Csv, Json };
std::string render_report(const std::vector<CvResult>& results, ReportFormat format);

// result.json: config fingerprint, per-fold metric arrays per run, per-run
// mean/std and the grand mean/std.
struct ResultFile {
  std::map<std::string, std::string> config;
  RepeatedResult result;
};

std::string result_file_json(const ResultFile& rf);
ResultFile parse_result_file(const std::string& json_text);

}  // namespace stylus
