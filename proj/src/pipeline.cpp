#include "stylus/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "stylus/rng.hpp"

namespace stylus {

std::string model_kind_name(ModelKind m) {
  switch (m) {
    case ModelKind::Lstm: return "lstm";
    case ModelKind::Gru: return "gru";
    case ModelKind::Svm: return "svm";
    case ModelKind::NaiveBayes: return "nb";
    case ModelKind::Knn: return "knn";
    case ModelKind::Tree: return "tree";
  }
  return "?";
}

std::string feature_scheme_name(FeatureScheme s) {
  switch (s) {
    case FeatureScheme::Stylometric: return "stylometric";
    case FeatureScheme::Tfidf: return "tfidf";
    case FeatureScheme::Lexicon: return "lexicon";
    case FeatureScheme::Embedding: return "embedding";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "lstm") return ModelKind::Lstm;
  if (name == "gru") return ModelKind::Gru;
  if (name == "svm") return ModelKind::Svm;
  if (name == "nb") return ModelKind::NaiveBayes;
  if (name == "knn") return ModelKind::Knn;
  if (name == "tree" || name == "dt") return ModelKind::Tree;
  fail(ErrorCode::InvalidArgument, "unknown model \"" + name + "\"");
}

FeatureScheme parse_feature_scheme(const std::string& name) {
  if (name == "stylometric") return FeatureScheme::Stylometric;
  if (name == "tfidf") return FeatureScheme::Tfidf;
  if (name == "lexicon") return FeatureScheme::Lexicon;
  if (name == "embedding") return FeatureScheme::Embedding;
  fail(ErrorCode::InvalidArgument, "unknown feature scheme \"" + name + "\"");
}

Label resolve_positive(const TokenizedCorpus& tc, PositiveClass choice) {
  switch (choice) {
    case PositiveClass::ClassA: return Label::ClassA;
    case PositiveClass::ClassB: return Label::ClassB;
    case PositiveClass::Majority: return tc.majority_label();
  }
  return Label::ClassA;
}

namespace {

bool is_neural(ModelKind m) { return m == ModelKind::Lstm || m == ModelKind::Gru; }

struct SharedFeatures {
  std::vector<std::vector<double>> dense;        // fold-independent dense vectors
  std::vector<std::vector<uint32_t>> token_ids;  // embedding scheme, neural models
  size_t dense_dim = 0;
};

std::shared_ptr<const SharedFeatures> precompute(const TokenizedCorpus& tc,
                                                 const PipelineConfig& cfg) {
  auto sf = std::make_shared<SharedFeatures>();
  switch (cfg.scheme) {
    case FeatureScheme::Stylometric:
      sf->dense_dim = kStylometricDim;
      sf->dense.reserve(tc.docs.size());
      for (const auto& d : tc.docs) {
        auto v = stylometric_vector(d.seq);
        sf->dense.emplace_back(v.begin(), v.end());
      }
      break;
    case FeatureScheme::Lexicon:
      if (!cfg.lexicon) fail(ErrorCode::InvalidArgument, "lexicon scheme needs a lexicon");
      sf->dense_dim = cfg.lexicon->categories.size();
      sf->dense.reserve(tc.docs.size());
      for (const auto& d : tc.docs) sf->dense.push_back(lexicon_vector(d.seq, *cfg.lexicon));
      break;
    case FeatureScheme::Embedding:
      if (!cfg.embedding)
        fail(ErrorCode::InvalidArgument, "embedding scheme needs a trained embedding model");
      if (is_neural(cfg.model)) {
        sf->token_ids.reserve(tc.docs.size());
        for (const auto& d : tc.docs) {
          auto ids = encode_tokens(cfg.embedding->vocab, d.seq.tokens);
          if (ids.empty()) ids.push_back(EmbeddingLayer::kUnk);
          sf->token_ids.push_back(std::move(ids));
        }
      } else {
        sf->dense_dim = static_cast<size_t>(cfg.embedding->dim);
        sf->dense.reserve(tc.docs.size());
        for (const auto& d : tc.docs) sf->dense.push_back(mean_embedding(*cfg.embedding, d.seq));
      }
      break;
    case FeatureScheme::Tfidf:
      break;  // refit per fold
  }
  return sf;
}

struct Standardizer {
  std::vector<double> mean, inv_std;

  static Standardizer fit(const std::vector<std::vector<double>>& rows,
                          const std::vector<size_t>& idx) {
    Standardizer s;
    if (idx.empty() || rows.empty()) return s;
    size_t dim = rows[idx[0]].size();
    s.mean.assign(dim, 0.0);
    s.inv_std.assign(dim, 1.0);
    for (size_t i : idx)
      for (size_t j = 0; j < dim; ++j) s.mean[j] += rows[i][j];
    for (double& m : s.mean) m /= static_cast<double>(idx.size());
    std::vector<double> var(dim, 0.0);
    for (size_t i : idx)
      for (size_t j = 0; j < dim; ++j) {
        double d = rows[i][j] - s.mean[j];
        var[j] += d * d;
      }
    for (size_t j = 0; j < dim; ++j) {
      double v = var[j] / static_cast<double>(idx.size());
      s.inv_std[j] = v > 0 ? 1.0 / std::sqrt(v) : 1.0;
    }
    return s;
  }

  std::vector<double> apply(std::vector<double> x) const {
    if (mean.empty()) return x;
    for (size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - mean[j]) * inv_std[j];
    return x;
  }
};

// High-df columns first (low idf), ties toward the lexicographically earlier
// column; the returned selection is sorted by column so dense layouts keep
// vocabulary order.
std::vector<uint64_t> dense_column_plan(const TfidfModel& model, size_t cap) {
  size_t v = model.idf.size();
  if (v <= cap) {
    std::vector<uint64_t> all(v);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  std::vector<uint64_t> cols(v);
  std::iota(cols.begin(), cols.end(), 0);
  std::sort(cols.begin(), cols.end(), [&](uint64_t a, uint64_t b) {
    if (model.idf[a] != model.idf[b]) return model.idf[a] < model.idf[b];
    return a < b;
  });
  cols.resize(cap);
  std::sort(cols.begin(), cols.end());
  return cols;
}

std::vector<Label> gather_labels(const TokenizedCorpus& tc, const std::vector<size_t>& idx) {
  std::vector<Label> y;
  y.reserve(idx.size());
  for (size_t i : idx) y.push_back(tc.docs[i].label);
  return y;
}

void require_two_train_classes(const std::vector<Label>& y) {
  bool a = false, b = false;
  for (Label l : y) (l == Label::ClassA ? a : b) = true;
  if (!a || !b)
    fail(ErrorCode::InsufficientClasses, "a training split contains only one class");
}

struct FoldData {
  const TokenizedCorpus* tc = nullptr;
  const PipelineConfig* cfg = nullptr;
  const SharedFeatures* shared = nullptr;
  std::optional<TfidfModel> tfidf;
  std::vector<uint64_t> dense_cols;  // tfidf -> dense mapping
  Standardizer standardizer;
  bool standardized = false;

  SparseVector sparse_at(size_t i) const {
    if (cfg->scheme == FeatureScheme::Tfidf) return transform_tfidf(*tfidf, tc->docs[i].seq);
    return dense_to_sparse(dense_at(i));
  }

  std::vector<double> dense_at(size_t i) const {
    if (cfg->scheme == FeatureScheme::Tfidf) {
      SparseVector sv = transform_tfidf(*tfidf, tc->docs[i].seq);
      std::vector<double> out(dense_cols.size(), 0.0);
      size_t k = 0;
      for (size_t c = 0; c < dense_cols.size(); ++c) {
        while (k < sv.indices.size() && sv.indices[k] < dense_cols[c]) ++k;
        if (k < sv.indices.size() && sv.indices[k] == dense_cols[c]) out[c] = sv.values[k];
      }
      return out;
    }
    std::vector<double> v = shared->dense[i];
    return standardized ? standardizer.apply(std::move(v)) : v;
  }

  size_t dense_dim() const {
    return cfg->scheme == FeatureScheme::Tfidf ? dense_cols.size() : shared->dense_dim;
  }
};

// (prediction, ClassA-oriented ranking score) for one held-out document.
using DocScorer = std::function<std::pair<Label, double>(size_t)>;

MetricSet score_split(const TokenizedCorpus& tc, const std::vector<size_t>& idx,
                      const DocScorer& scorer, Label positive) {
  std::vector<Label> preds, truth;
  std::vector<double> scores;
  preds.reserve(idx.size());
  truth.reserve(idx.size());
  scores.reserve(idx.size());
  for (size_t i : idx) {
    auto [label, score] = scorer(i);
    preds.push_back(label);
    scores.push_back(score);
    truth.push_back(tc.docs[i].label);
  }
  return evaluate_predictions(preds, scores, truth, positive);
}

FoldOutcome run_fold(const TokenizedCorpus& tc, const PipelineConfig& cfg,
                     const SharedFeatures& shared, Label positive, uint64_t fold_seed,
                     const FoldSplit& split) {
  FoldData data;
  data.tc = &tc;
  data.cfg = &cfg;
  data.shared = &shared;

  std::vector<Label> y_train = gather_labels(tc, split.train);
  require_two_train_classes(y_train);

  bool needs_dense = is_neural(cfg.model) || cfg.model == ModelKind::Tree;
  bool scale_sensitive = is_neural(cfg.model) || cfg.model == ModelKind::Svm ||
                         cfg.model == ModelKind::Knn;
  bool dense_scheme = cfg.scheme == FeatureScheme::Stylometric ||
                      (cfg.scheme == FeatureScheme::Embedding && !shared.dense.empty());
  if (cfg.scheme == FeatureScheme::Tfidf) {
    std::vector<const TokenSequence*> train_docs;
    train_docs.reserve(split.train.size());
    for (size_t i : split.train) train_docs.push_back(&tc.docs[i].seq);
    data.tfidf = fit_tfidf(train_docs, cfg.tfidf);
    if (needs_dense) data.dense_cols = dense_column_plan(*data.tfidf, cfg.max_dense_features);
  } else if (dense_scheme && cfg.standardize_dense && scale_sensitive) {
    data.standardizer = Standardizer::fit(shared.dense, split.train);
    data.standardized = true;
  }

  DocScorer scorer;
  bool token_mode = cfg.scheme == FeatureScheme::Embedding && is_neural(cfg.model);

  if (is_neural(cfg.model)) {
    auto make_input = [&](size_t i) {
      SequenceInput in;
      if (token_mode) in.token_ids = shared.token_ids[i];
      else in.dense = data.dense_at(i);
      return in;
    };
    std::vector<TrainSample> train_samples, verif_samples;
    train_samples.reserve(split.train.size());
    for (size_t i : split.train) train_samples.push_back({make_input(i), tc.docs[i].label});
    verif_samples.reserve(split.verification.size());
    for (size_t i : split.verification)
      verif_samples.push_back({make_input(i), tc.docs[i].label});

    std::optional<EmbeddingLayer> layer;
    size_t input_dim = data.dense_dim();
    if (token_mode) {
      layer = mount_layer(*cfg.embedding, cfg.embedding_trainable, derive_seed(fold_seed, 9));
      input_dim = static_cast<size_t>(cfg.embedding->dim);
    }
    auto model = std::make_shared<RecurrentClassifier>(make_classifier(
        cfg.model == ModelKind::Lstm ? CellKind::Lstm : CellKind::Gru,
        static_cast<int>(input_dim), cfg.hidden_dim, derive_seed(fold_seed, 7), std::move(layer),
        cfg.max_seq_len));
    TrainConfig train_cfg;
    train_cfg.epochs = cfg.epochs;
    train_cfg.batch_size = cfg.batch_size;
    train_cfg.seed = fold_seed;
    train_cfg.clip_norm = cfg.clip_norm;
    train_cfg.optimizer = cfg.optimizer;
    train(*model, train_samples, verif_samples, train_cfg);

    scorer = [&, model, make_input](size_t i) {
      auto p = predict_prob(*model, make_input(i));
      Label pred = p[0] >= p[1] ? Label::ClassA : Label::ClassB;
      return std::make_pair(pred, p[0]);
    };
    FoldOutcome out;
    out.test = score_split(tc, split.test, scorer, positive);
    out.verification = score_split(tc, split.verification, scorer, positive);
    return out;
  }

  if (cfg.model == ModelKind::Tree) {
    Matrix x_train(split.train.size(), data.dense_dim());
    for (size_t r = 0; r < split.train.size(); ++r) {
      auto v = data.dense_at(split.train[r]);
      std::copy(v.begin(), v.end(), x_train.row(r));
    }
    auto model = std::make_shared<TreeModel>(
        tree_fit(x_train, y_train, cfg.tree_max_depth, cfg.tree_min_leaf));
    scorer = [&, model](size_t i) {
      auto v = data.dense_at(i);
      return std::make_pair(tree_predict(*model, v.data()), tree_score(*model, v.data()));
    };
    FoldOutcome out;
    out.test = score_split(tc, split.test, scorer, positive);
    out.verification = score_split(tc, split.verification, scorer, positive);
    return out;
  }

  std::vector<SparseVector> x_train;
  x_train.reserve(split.train.size());
  for (size_t i : split.train) x_train.push_back(data.sparse_at(i));

  switch (cfg.model) {
    case ModelKind::NaiveBayes: {
      bool multinomial = cfg.nb_variant == NbVariant::Multinomial ||
                         (cfg.nb_variant == NbVariant::Auto &&
                          cfg.scheme == FeatureScheme::Tfidf);
      auto model = std::make_shared<NbModel>(multinomial
                                                 ? nb_fit(x_train, y_train, cfg.nb_alpha)
                                                 : gaussian_nb_fit(x_train, y_train));
      scorer = [&, model](size_t i) {
        SparseVector v = data.sparse_at(i);
        return std::make_pair(nb_predict(*model, v).first, nb_score(*model, v));
      };
      break;
    }
    case ModelKind::Svm: {
      SvmConfig sc{cfg.svm_lambda, cfg.svm_epochs, fold_seed};
      auto model = std::make_shared<SvmModel>(svm_fit(x_train, y_train, sc));
      scorer = [&, model](size_t i) {
        SparseVector v = data.sparse_at(i);
        return std::make_pair(svm_predict(*model, v), svm_margin(*model, v));
      };
      break;
    }
    case ModelKind::Knn: {
      int k = std::min<int>(cfg.knn_k, static_cast<int>(x_train.size()));
      auto model = std::make_shared<KnnModel>(
          knn_fit(std::move(x_train), y_train, k, cfg.knn_metric));
      scorer = [&, model](size_t i) {
        SparseVector v = data.sparse_at(i);
        return std::make_pair(knn_predict(*model, v), knn_score(*model, v));
      };
      break;
    }
    default:
      fail(ErrorCode::InvalidArgument, "unhandled model kind");
  }

  FoldOutcome out;
  out.test = score_split(tc, split.test, scorer, positive);
  out.verification = score_split(tc, split.verification, scorer, positive);
  return out;
}

std::string label_display_name(const TokenizedCorpus& tc, Label l) {
  const std::string& n = tc.label_names[label_index(l)];
  if (!n.empty()) return n;
  return l == Label::ClassA ? "class_a" : "class_b";
}

}  // namespace

FoldRunner make_fold_runner(const TokenizedCorpus& tc, const PipelineConfig& config,
                            Label positive) {
  auto shared = precompute(tc, config);
  const TokenizedCorpus* tcp = &tc;
  PipelineConfig cfg = config;  // lexicon/embedding pointers must outlive the runner
  return [tcp, cfg, shared, positive](size_t, uint64_t fold_seed,
                                      const FoldSplit& split) -> FoldOutcome {
    return run_fold(*tcp, cfg, *shared, positive, fold_seed, split);
  };
}

ResultFile run_evaluation(const TokenizedCorpus& tc, const PipelineConfig& config,
                          const EvaluationRequest& request) {
  if (tc.docs.empty()) fail(ErrorCode::EmptyDataset, "no documents to evaluate");
  if (!tc.has_both_classes())
    fail(ErrorCode::InsufficientClasses, "evaluation corpus must contain both classes");

  Label positive = resolve_positive(tc, request.positive);
  std::map<std::string, std::string> fingerprint;
  fingerprint["model"] = model_kind_name(config.model);
  fingerprint["features"] = feature_scheme_name(config.scheme);
  fingerprint["positive_class"] = label_display_name(tc, positive);
  if (request.stratify) fingerprint["stratify"] = "true";
  if (config.scheme == FeatureScheme::Embedding && config.embedding) {
    fingerprint["embedding_arch"] =
        config.embedding->arch == W2vArch::Cbow ? "cbow" : "sg";
    fingerprint["embedding_trainable"] = config.embedding_trainable ? "true" : "false";
  }

  FoldRunner runner = make_fold_runner(tc, config, positive);
  std::vector<Label> labels;
  labels.reserve(tc.docs.size());
  for (const auto& d : tc.docs) labels.push_back(d.label);

  auto one_run = [&](uint64_t seed) {
    return cross_validate(labels, request.folds, request.mode, seed, runner, fingerprint,
                          request.stratify, request.jobs);
  };

  ResultFile rf;
  rf.result = repeat_runs(request.runs, request.seed, one_run);
  rf.config = fingerprint;
  rf.config["folds"] = std::to_string(request.folds);
  rf.config["cv_mode"] = request.mode == CvMode::PaperLiteral ? "paper-literal" : "standard";
  rf.config["runs"] = std::to_string(request.runs);
  rf.config["base_seed"] = std::to_string(request.seed);
  return rf;
}

LearningCurve learning_curve(const TokenizedCorpus& tc, const PipelineConfig& config, int epochs,
                             double val_fraction, uint64_t seed) {
  if (!is_neural(config.model))
    fail(ErrorCode::InvalidArgument, "learning curves need an lstm or gru model");
  if (tc.docs.empty()) fail(ErrorCode::EmptyDataset, "no documents");
  if (val_fraction < 0 || val_fraction >= 1)
    fail(ErrorCode::InvalidArgument, "val fraction must be in [0, 1)");

  std::vector<size_t> order(tc.docs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  fisher_yates(order, rng);
  size_t n_val = static_cast<size_t>(std::floor(val_fraction * static_cast<double>(order.size())));
  FoldSplit split;
  split.test.assign(order.begin(), order.begin() + static_cast<ptrdiff_t>(n_val));
  split.verification = split.test;
  split.train.assign(order.begin() + static_cast<ptrdiff_t>(n_val), order.end());

  auto shared = precompute(tc, config);
  std::vector<Label> y_train = gather_labels(tc, split.train);
  require_two_train_classes(y_train);

  FoldData data;
  data.tc = &tc;
  data.cfg = &config;
  data.shared = shared.get();
  if (config.scheme == FeatureScheme::Tfidf) {
    std::vector<const TokenSequence*> train_docs;
    for (size_t i : split.train) train_docs.push_back(&tc.docs[i].seq);
    data.tfidf = fit_tfidf(train_docs, config.tfidf);
    data.dense_cols = dense_column_plan(*data.tfidf, config.max_dense_features);
  } else if (config.scheme == FeatureScheme::Stylometric && config.standardize_dense) {
    data.standardizer = Standardizer::fit(shared->dense, split.train);
    data.standardized = true;
  }

  bool token_mode = config.scheme == FeatureScheme::Embedding;
  auto make_input = [&](size_t i) {
    SequenceInput in;
    if (token_mode) in.token_ids = shared->token_ids[i];
    else in.dense = data.dense_at(i);
    return in;
  };
  std::vector<TrainSample> train_samples, val_samples;
  for (size_t i : split.train) train_samples.push_back({make_input(i), tc.docs[i].label});
  for (size_t i : split.test) val_samples.push_back({make_input(i), tc.docs[i].label});

  std::optional<EmbeddingLayer> layer;
  size_t input_dim = data.dense_dim();
  if (token_mode) {
    layer = mount_layer(*config.embedding, config.embedding_trainable, derive_seed(seed, 9));
    input_dim = static_cast<size_t>(config.embedding->dim);
  }
  RecurrentClassifier model = make_classifier(
      config.model == ModelKind::Lstm ? CellKind::Lstm : CellKind::Gru,
      static_cast<int>(input_dim), config.hidden_dim, derive_seed(seed, 7), std::move(layer),
      config.max_seq_len);
  TrainConfig train_cfg;
  train_cfg.epochs = epochs;
  train_cfg.batch_size = config.batch_size;
  train_cfg.seed = seed;
  train_cfg.clip_norm = config.clip_norm;
  train_cfg.optimizer = config.optimizer;
  return train(model, train_samples, val_samples, train_cfg);
}

}  // namespace stylus
