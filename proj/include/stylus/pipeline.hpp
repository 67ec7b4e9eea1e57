#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stylus/classifiers.hpp"
#include "stylus/embeddings.hpp"
#include "stylus/eval.hpp"
#include "stylus/features.hpp"
#include "stylus/neural.hpp"
#include "stylus/preprocess.hpp"

namespace stylus {

enum class ModelKind { Lstm, Gru, Svm, NaiveBayes, Knn, Tree };

enum class FeatureScheme { Stylometric, Tfidf, Lexicon, Embedding };

std::string model_kind_name(ModelKind m);
std::string feature_scheme_name(FeatureScheme s);
ModelKind parse_model_kind(const std::string& name);
FeatureScheme parse_feature_scheme(const std::string& name);

// Auto picks multinomial for TF-IDF pseudo-counts and Gaussian for the
// dense real-valued schemes.
enum class NbVariant { Auto, Multinomial, Gaussian };

// One (model, feature scheme) experiment configuration. TF-IDF is refit on
// each fold's training documents; stylometric/lexicon/embedding document
// vectors are fold-independent and computed once.
struct PipelineConfig {
  ModelKind model = ModelKind::NaiveBayes;
  FeatureScheme scheme = FeatureScheme::Tfidf;

  TfidfConfig tfidf;
  // Dense consumers (neural nets, decision tree) see at most this many
  // TF-IDF columns, preferring high document frequency.
  size_t max_dense_features = 2000;

  const Lexicon* lexicon = nullptr;
  const EmbeddingModel* embedding = nullptr;  // required for the embedding scheme
  bool embedding_trainable = false;
  int max_seq_len = 100;

  int hidden_dim = 300;
  int epochs = 5;
  int batch_size = 32;
  RmspropConfig optimizer;
  std::optional<double> clip_norm;

  double nb_alpha = 1.0;
  NbVariant nb_variant = NbVariant::Auto;
  double svm_lambda = 1e-4;
  int svm_epochs = 20;
  int knn_k = 5;
  KnnMetric knn_metric = KnnMetric::Cosine;
  int tree_max_depth = 10;
  int tree_min_leaf = 2;

  // z-score stylometric and mean-embedding vectors (fit on train) for
  // scale-sensitive models (SVM, KNN, neural nets).
  bool standardize_dense = true;
};

// Positive class used for precision/recall/F1; Majority follows the
// corpus-level majority, matching the reported-F1 plausibility under the
// original 2947/949 imbalance.
enum class PositiveClass { Majority, ClassA, ClassB };

Label resolve_positive(const TokenizedCorpus& tc, PositiveClass choice);

FoldRunner make_fold_runner(const TokenizedCorpus& tc, const PipelineConfig& config,
                            Label positive);

struct EvaluationRequest {
  size_t folds = 10;
  CvMode mode = CvMode::StandardKfold;
  size_t runs = 10;
  uint64_t seed = 0;
  bool stratify = false;
  unsigned jobs = 1;
  PositiveClass positive = PositiveClass::Majority;
};

ResultFile run_evaluation(const TokenizedCorpus& tc, const PipelineConfig& config,
                          const EvaluationRequest& request);

// Trains one neural configuration on a seeded train/validation split of the
// whole corpus and returns the per-epoch curve.
LearningCurve learning_curve(const TokenizedCorpus& tc, const PipelineConfig& config, int epochs,
                             double val_fraction, uint64_t seed);

}  // namespace stylus
