// stylus: batch authorship-profiling toolkit. Subcommands cover the whole
// experiment flow: ingest -> preprocess -> featurize/train-embeddings ->
// evaluate/learning-curve -> report. All randomness comes from --seed flags;
// every --out file gets a <out>.manifest.json beside it.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stylus/corpus.hpp"
#include "stylus/manifest.hpp"
#include "stylus/pipeline.hpp"
#include "stylus/serialize.hpp"

namespace {

using namespace stylus;

void print_error(const std::string& code, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = code;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open for writing: " + path);
  out << content;
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

struct CommonState {
  std::vector<std::string> argv_copy;
};

void emit_manifest(const CommonState& state, const std::vector<std::string>& inputs,
                   uint64_t seed, const std::string& out_path) {
  write_manifest(build_manifest(state.argv_copy, inputs, seed), out_path);
}

struct TfidfFlags {
  size_t min_df = 2;
  std::string ngrams = "1:2";

  TfidfConfig config() const {
    TfidfConfig c;
    c.min_df = min_df;
    size_t colon = ngrams.find(':');
    try {
      if (colon == std::string::npos) {
        c.ngram_lo = 1;
        c.ngram_hi = std::stoi(ngrams);
      } else {
        c.ngram_lo = std::stoi(ngrams.substr(0, colon));
        c.ngram_hi = std::stoi(ngrams.substr(colon + 1));
      }
    } catch (const std::logic_error&) {
      fail(ErrorCode::InvalidArgument, "--ngrams must look like 1:2 or 2:2");
    }
    if (c.ngram_lo < 1 || c.ngram_hi < c.ngram_lo)
      fail(ErrorCode::InvalidArgument, "--ngrams must satisfy 1 <= lo <= hi");
    return c;
  }
};

// Flags shared by evaluate and learning-curve for building a PipelineConfig.
struct PipelineFlags {
  std::string model = "nb";
  std::string features = "tfidf";
  TfidfFlags tfidf;
  size_t max_dense_features = 2000;
  std::string lexicon_path;
  std::string embeddings_path;
  std::string embedding_arch = "cbow";
  bool embedding_trainable = false;
  int max_seq_len = 100;
  int hidden = 300;
  int epochs = 5;
  int batch = 32;
  double lr = 0.001;
  double clip_norm = 0.0;
  double nb_alpha = 1.0;
  std::string nb_variant = "auto";
  double svm_lambda = 1e-4;
  int svm_epochs = 20;
  int knn_k = 5;
  std::string knn_metric = "cosine";
  int tree_max_depth = 10;
  int tree_min_leaf = 2;
  bool no_standardize = false;

  // Owning storage resolved from the paths above.
  std::optional<Lexicon> lexicon;
  std::optional<EmbeddingModel> embedding;

  void add_to(CLI::App* cmd, bool with_model_choice) {
    if (with_model_choice)
      cmd->add_option("--model", model, "Model: lstm|gru|svm|nb|knn|tree")->required();
    cmd->add_option("--features", features,
                    "Feature scheme: stylometric|tfidf|lexicon|embedding")
        ->required();
    cmd->add_option("--min-df", tfidf.min_df, "TF-IDF minimum document frequency (default 2)");
    cmd->add_option("--ngrams", tfidf.ngrams, "TF-IDF ngram range lo:hi (default 1:2)");
    cmd->add_option("--max-features", max_dense_features,
                    "Cap on TF-IDF columns densified for neural/tree models");
    cmd->add_option("--lexicon", lexicon_path, "Lexicon TSV (token<TAB>category<TAB>weight)");
    cmd->add_option("--embeddings", embeddings_path, "word2vec text file for embedding features");
    cmd->add_option("--embedding-arch", embedding_arch,
                    "Architecture label of the embeddings file: cbow|sg");
    cmd->add_flag("--embedding-trainable", embedding_trainable,
                  "Update embedding rows during neural training (default frozen)");
    cmd->add_option("--max-seq-len", max_seq_len, "Token sequence truncation length");
    cmd->add_option("--hidden", hidden, "Recurrent hidden units (default 300)");
    cmd->add_option("--epochs", epochs, "Training epochs (default 5)");
    cmd->add_option("--batch", batch, "Mini-batch size (default 32)");
    cmd->add_option("--lr", lr, "RMSprop learning rate (default 0.001)");
    cmd->add_option("--clip-norm", clip_norm, "Gradient clipping norm (0 disables)");
    cmd->add_option("--nb-alpha", nb_alpha, "Naive Bayes Laplace smoothing");
    cmd->add_option("--nb-variant", nb_variant,
                    "Naive Bayes flavor: auto|multinomial|gaussian (default auto)");
    cmd->add_option("--svm-lambda", svm_lambda, "SVM regularization lambda");
    cmd->add_option("--svm-epochs", svm_epochs, "SVM training epochs");
    cmd->add_option("--knn-k", knn_k, "KNN neighbor count");
    cmd->add_option("--knn-metric", knn_metric, "KNN metric: cosine|euclidean");
    cmd->add_option("--tree-max-depth", tree_max_depth, "Decision tree depth limit");
    cmd->add_option("--tree-min-leaf", tree_min_leaf, "Decision tree minimum leaf size");
    cmd->add_flag("--no-standardize", no_standardize,
                  "Disable z-scoring of dense vectors for scale-sensitive models");
  }

  PipelineConfig config() {
    PipelineConfig cfg;
    cfg.model = parse_model_kind(model);
    cfg.scheme = parse_feature_scheme(features);
    cfg.tfidf = tfidf.config();
    cfg.max_dense_features = max_dense_features;
    cfg.max_seq_len = max_seq_len;
    cfg.hidden_dim = hidden;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.optimizer.lr = lr;
    if (clip_norm > 0) cfg.clip_norm = clip_norm;
    cfg.nb_alpha = nb_alpha;
    if (nb_variant == "auto") cfg.nb_variant = NbVariant::Auto;
    else if (nb_variant == "multinomial") cfg.nb_variant = NbVariant::Multinomial;
    else if (nb_variant == "gaussian") cfg.nb_variant = NbVariant::Gaussian;
    else fail(ErrorCode::InvalidArgument, "--nb-variant must be auto, multinomial or gaussian");
    cfg.svm_lambda = svm_lambda;
    cfg.svm_epochs = svm_epochs;
    cfg.knn_k = knn_k;
    if (knn_metric == "cosine") cfg.knn_metric = KnnMetric::Cosine;
    else if (knn_metric == "euclidean") cfg.knn_metric = KnnMetric::Euclidean;
    else fail(ErrorCode::InvalidArgument, "--knn-metric must be cosine or euclidean");
    cfg.tree_max_depth = tree_max_depth;
    cfg.tree_min_leaf = tree_min_leaf;
    cfg.standardize_dense = !no_standardize;
    cfg.embedding_trainable = embedding_trainable;

    if (cfg.scheme == FeatureScheme::Lexicon) {
      if (lexicon_path.empty())
        fail(ErrorCode::InvalidArgument, "--lexicon is required for the lexicon scheme");
      lexicon = load_lexicon(lexicon_path);
      cfg.lexicon = &*lexicon;
    }
    if (cfg.scheme == FeatureScheme::Embedding) {
      if (embeddings_path.empty())
        fail(ErrorCode::InvalidArgument, "--embeddings is required for the embedding scheme");
      embedding = load_word2vec_text(embeddings_path);
      if (embedding_arch == "cbow") embedding->arch = W2vArch::Cbow;
      else if (embedding_arch == "sg") embedding->arch = W2vArch::SkipGram;
      else fail(ErrorCode::InvalidArgument, "--embedding-arch must be cbow or sg");
      cfg.embedding = &*embedding;
    }
    return cfg;
  }

  std::vector<std::string> input_paths(const std::string& tokens_path) const {
    std::vector<std::string> inputs{tokens_path};
    if (!lexicon_path.empty()) inputs.push_back(lexicon_path);
    if (!embeddings_path.empty()) inputs.push_back(embeddings_path);
    return inputs;
  }
};

int run(int argc, char** argv) {
  CommonState state;
  for (int i = 0; i < argc; ++i) state.argv_copy.emplace_back(argv[i]);

  CLI::App app{"stylus: authorship profiling toolkit"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load a labeled JSONL/CSV corpus into corpus.bin");
  std::string in_path, in_format = "auto", positive_label, negative_label, out_path;
  ingest->add_option("--input", in_path, "Input JSONL or CSV file")->required();
  ingest->add_option("--format", in_format, "jsonl|csv (default: by extension)");
  ingest->add_option("--positive-label", positive_label, "Label string mapped to the positive class")
      ->required();
  ingest->add_option("--negative-label", negative_label,
                     "Label string mapped to the negative class (default: inferred)");
  ingest->add_option("--out", out_path, "Output corpus.bin")->required();
  ingest->callback([&] {
    CorpusFormat fmt;
    if (in_format == "jsonl") fmt = CorpusFormat::Jsonl;
    else if (in_format == "csv") fmt = CorpusFormat::Csv;
    else if (in_format == "auto")
      fmt = in_path.size() >= 4 && in_path.substr(in_path.size() - 4) == ".csv"
                ? CorpusFormat::Csv
                : CorpusFormat::Jsonl;
    else fail(ErrorCode::InvalidArgument, "--format must be jsonl or csv");
    Corpus corpus = load_corpus(in_path, fmt, {positive_label, negative_label});
    save_corpus(corpus, out_path);
    emit_manifest(state, {in_path}, 0, out_path);
  });

  // summary
  auto* summary = app.add_subcommand("summary", "Print per-class counts of a corpus.bin as JSON");
  std::string summary_path;
  summary->add_option("corpus", summary_path, "corpus.bin")->required();
  summary->callback([&] { std::cout << summary_json(load_corpus_bin(summary_path)) << "\n"; });

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "Clean and tokenize a corpus into tokens.bin");
  std::string prep_corpus, prep_stopwords, prep_ranges = "0980-09FF", prep_out;
  uint32_t prep_threshold = 3;
  bool prep_drop_digits = false;
  prep->add_option("--corpus", prep_corpus, "corpus.bin input")->required();
  prep->add_option("--stopwords", prep_stopwords, "Stopword list (one word per line)");
  prep->add_option("--script-ranges", prep_ranges,
                   "Retained codepoint ranges, hex pairs like 0980-09FF[,...]");
  prep->add_option("--elongation-threshold", prep_threshold, "Repeat run length (default 3)");
  prep->add_flag("--drop-digits", prep_drop_digits, "Filter Bangla digits out as well");
  prep->add_option("--out", prep_out, "tokens.bin output")->required();
  prep->callback([&] {
    PreprocessConfig config;
    config.ranges = parse_script_ranges(prep_ranges);
    config.keep_digits = !prep_drop_digits;
    config.elongation_threshold = prep_threshold;
    std::vector<std::string> inputs{prep_corpus};
    if (!prep_stopwords.empty()) {
      config.stopwords = load_stopwords(prep_stopwords);
      inputs.push_back(prep_stopwords);
    }
    save_tokens(preprocess_corpus(load_corpus_bin(prep_corpus), config), prep_out);
    emit_manifest(state, inputs, 0, prep_out);
  });

  // featurize
  auto* feat = app.add_subcommand("featurize", "Export one feature scheme to features.bin");
  std::string feat_tokens, feat_scheme, feat_lexicon, feat_embeddings, feat_out, feat_csv;
  TfidfFlags feat_tfidf;
  feat->add_option("--tokens", feat_tokens, "tokens.bin input")->required();
  feat->add_option("--scheme", feat_scheme, "stylometric|tfidf|lexicon|embedding")->required();
  feat->add_option("--lexicon", feat_lexicon, "Lexicon TSV for the lexicon scheme");
  feat->add_option("--embeddings", feat_embeddings, "word2vec text file for the embedding scheme");
  feat->add_option("--min-df", feat_tfidf.min_df, "TF-IDF minimum document frequency");
  feat->add_option("--ngrams", feat_tfidf.ngrams, "TF-IDF ngram range lo:hi");
  feat->add_option("--out", feat_out, "features.bin output")->required();
  feat->add_option("--csv", feat_csv, "Optional CSV debug export path");
  feat->callback([&] {
    TokenizedCorpus tc = load_tokens(feat_tokens);
    FeatureScheme scheme = parse_feature_scheme(feat_scheme);
    FeatureFile file;
    file.scheme = feat_scheme;
    file.label_names = tc.label_names;
    std::vector<std::string> inputs{feat_tokens};
    for (const auto& d : tc.docs) {
      file.doc_ids.push_back(d.id);
      file.labels.push_back(d.label);
    }
    switch (scheme) {
      case FeatureScheme::Stylometric:
        file.dim = kStylometricDim;
        for (const auto& d : tc.docs) {
          auto v = stylometric_vector(d.seq);
          file.rows.push_back(dense_to_sparse({v.begin(), v.end()}));
          file.rows.back().dim = file.dim;
        }
        break;
      case FeatureScheme::Tfidf: {
        std::vector<const TokenSequence*> docs;
        for (const auto& d : tc.docs) docs.push_back(&d.seq);
        TfidfModel model = fit_tfidf(docs, feat_tfidf.config());
        file.dim = model.vocabulary.size();
        for (const auto& d : tc.docs) file.rows.push_back(transform_tfidf(model, d.seq));
        break;
      }
      case FeatureScheme::Lexicon: {
        if (feat_lexicon.empty())
          fail(ErrorCode::InvalidArgument, "--lexicon is required for the lexicon scheme");
        Lexicon lex = load_lexicon(feat_lexicon);
        inputs.push_back(feat_lexicon);
        file.dim = lex.categories.size();
        for (const auto& d : tc.docs) {
          file.rows.push_back(dense_to_sparse(lexicon_vector(d.seq, lex)));
          file.rows.back().dim = file.dim;
        }
        break;
      }
      case FeatureScheme::Embedding: {
        if (feat_embeddings.empty())
          fail(ErrorCode::InvalidArgument, "--embeddings is required for the embedding scheme");
        EmbeddingModel model = load_word2vec_text(feat_embeddings);
        inputs.push_back(feat_embeddings);
        file.dim = static_cast<uint64_t>(model.dim);
        for (const auto& d : tc.docs) {
          file.rows.push_back(dense_to_sparse(mean_embedding(model, d.seq)));
          file.rows.back().dim = file.dim;
        }
        break;
      }
    }
    save_features(file, feat_out);
    if (!feat_csv.empty()) write_file(feat_csv, features_csv(file));
    emit_manifest(state, inputs, 0, feat_out);
  });

  // train-embeddings
  auto* emb = app.add_subcommand("train-embeddings", "Train word2vec vectors from tokens.bin");
  std::string emb_tokens, emb_arch = "cbow", emb_out;
  Word2vecConfig emb_cfg;
  emb->add_option("--tokens", emb_tokens, "tokens.bin input")->required();
  emb->add_option("--arch", emb_arch, "cbow|sg (default cbow)");
  emb->add_option("--dim", emb_cfg.dim, "Vector width (default 100)");
  emb->add_option("--window", emb_cfg.window, "Context window (default 5)");
  emb->add_option("--negatives", emb_cfg.negatives, "Negative samples per pair (default 5)");
  emb->add_option("--epochs", emb_cfg.epochs, "Training epochs (default 5)");
  emb->add_option("--lr", emb_cfg.lr_start, "Starting learning rate (default 0.025)");
  emb->add_option("--min-count", emb_cfg.min_count, "Vocabulary frequency floor (default 2)");
  emb->add_option("--subsample", emb_cfg.subsample, "Frequency subsampling threshold (0 = off)");
  emb->add_option("--seed", emb_cfg.seed, "Random seed (default 1)");
  emb->add_option("--out", emb_out, "Output vectors (word2vec text format)")->required();
  emb->callback([&] {
    if (emb_arch == "cbow") emb_cfg.arch = W2vArch::Cbow;
    else if (emb_arch == "sg") emb_cfg.arch = W2vArch::SkipGram;
    else fail(ErrorCode::InvalidArgument, "--arch must be cbow or sg");
    TokenizedCorpus tc = load_tokens(emb_tokens);
    std::vector<const TokenSequence*> docs;
    for (const auto& d : tc.docs) docs.push_back(&d.seq);
    save_word2vec_text(train_word2vec(docs, emb_cfg), emb_out);
    emit_manifest(state, {emb_tokens}, emb_cfg.seed, emb_out);
  });

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Cross-validated evaluation to result.json");
  std::string eval_tokens, eval_mode, eval_positive = "majority", eval_out;
  PipelineFlags eval_flags;
  size_t eval_folds = 10, eval_runs = 10;
  uint64_t eval_seed = 0;
  unsigned eval_jobs = 1;
  bool eval_stratify = false;
  eval_cmd->add_option("--tokens", eval_tokens, "tokens.bin input")->required();
  eval_flags.add_to(eval_cmd, true);
  eval_cmd->add_option("--cv-mode", eval_mode, "paper-literal|standard (no default)")->required();
  eval_cmd->add_option("--folds", eval_folds, "Fold count (default 10)");
  eval_cmd->add_option("--runs", eval_runs, "Repeated runs averaged (default 10)");
  eval_cmd->add_option("--seed", eval_seed, "Base seed; run r uses seed+r");
  eval_cmd->add_flag("--stratify", eval_stratify, "Stratified grouping (off by default)");
  eval_cmd->add_option("--jobs", eval_jobs, "Folds evaluated in parallel (default 1)");
  eval_cmd->add_option("--positive-class", eval_positive,
                       "Metrics positive class: majority|a|b (default majority)");
  eval_cmd->add_option("--out", eval_out, "result.json output")->required();
  eval_cmd->callback([&] {
    EvaluationRequest req;
    if (eval_mode == "paper-literal") req.mode = CvMode::PaperLiteral;
    else if (eval_mode == "standard") req.mode = CvMode::StandardKfold;
    else fail(ErrorCode::InvalidArgument, "--cv-mode must be paper-literal or standard");
    if (eval_positive == "majority") req.positive = PositiveClass::Majority;
    else if (eval_positive == "a") req.positive = PositiveClass::ClassA;
    else if (eval_positive == "b") req.positive = PositiveClass::ClassB;
    else fail(ErrorCode::InvalidArgument, "--positive-class must be majority, a or b");
    req.folds = eval_folds;
    req.runs = eval_runs;
    req.seed = eval_seed;
    req.stratify = eval_stratify;
    req.jobs = eval_jobs;
    TokenizedCorpus tc = load_tokens(eval_tokens);
    PipelineConfig cfg = eval_flags.config();
    ResultFile rf = run_evaluation(tc, cfg, req);
    write_file(eval_out, result_file_json(rf));
    emit_manifest(state, eval_flags.input_paths(eval_tokens), eval_seed, eval_out);
  });

  // learning-curve
  auto* curve_cmd = app.add_subcommand("learning-curve",
                                       "Per-epoch train/validation loss and accuracy CSV");
  std::string curve_tokens, curve_out;
  PipelineFlags curve_flags;
  curve_flags.model = "lstm";
  double curve_val_fraction = 0.2;
  uint64_t curve_seed = 0;
  curve_cmd->add_option("--tokens", curve_tokens, "tokens.bin input")->required();
  curve_cmd->add_option("--model", curve_flags.model, "lstm|gru (default lstm)");
  curve_flags.add_to(curve_cmd, false);
  curve_cmd->add_option("--val-fraction", curve_val_fraction,
                        "Held-out validation fraction (default 0.2)");
  curve_cmd->add_option("--seed", curve_seed, "Random seed");
  curve_cmd->add_option("--out", curve_out, "CSV output")->required();
  curve_cmd->callback([&] {
    TokenizedCorpus tc = load_tokens(curve_tokens);
    PipelineConfig cfg = curve_flags.config();
    LearningCurve curve = learning_curve(tc, cfg, curve_flags.epochs, curve_val_fraction,
                                         curve_seed);
    write_file(curve_out, curve_csv(curve));
    emit_manifest(state, curve_flags.input_paths(curve_tokens), curve_seed, curve_out);
  });

  // report
  auto* report_cmd = app.add_subcommand("report", "Render result.json files into a grid");
  std::vector<std::string> report_inputs;
  std::string report_format = "markdown", report_out;
  report_cmd->add_option("inputs", report_inputs, "result.json files")->required();
  report_cmd->add_option("--format", report_format, "markdown|csv|json (default markdown)");
  report_cmd->add_option("--out", report_out, "Output path (default: stdout)");
  report_cmd->callback([&] {
    ReportFormat fmt;
    if (report_format == "markdown") fmt = ReportFormat::Markdown;
    else if (report_format == "csv") fmt = ReportFormat::Csv;
    else if (report_format == "json") fmt = ReportFormat::Json;
    else fail(ErrorCode::InvalidArgument, "--format must be markdown, csv or json");
    std::vector<CvResult> results;
    for (const auto& path : report_inputs) {
      ResultFile rf = parse_result_file(read_text_file(path));
      CvResult summary_row;
      summary_row.fingerprint = rf.config;
      summary_row.mean = rf.result.grand_mean;
      summary_row.stddev = rf.result.grand_std;
      results.push_back(std::move(summary_row));
    }
    std::string rendered = render_report(results, fmt);
    if (report_out.empty()) {
      std::cout << rendered;
    } else {
      write_file(report_out, rendered);
      emit_manifest(state, report_inputs, 0, report_out);
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const stylus::Error& e) {
    print_error(stylus::error_code_name(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 2;
  }
}
