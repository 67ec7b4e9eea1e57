#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "stylus/common.hpp"
#include "stylus/preprocess.hpp"

namespace stylus {

struct SparseVector {
  std::vector<uint64_t> indices;  // strictly increasing, < dim
  std::vector<double> values;     // parallel, finite, non-zero
  uint64_t dim = 0;

  size_t nnz() const { return indices.size(); }
  double l2_norm() const;
};

double dot(const SparseVector& a, const SparseVector& b);
SparseVector dense_to_sparse(const std::vector<double>& v);
std::vector<double> sparse_to_dense(const SparseVector& v, size_t dim);

// Fixed 12-feature stylometric schema, in this order:
//   0 char_count                 raw non-whitespace codepoints
//   1 word_count_raw             raw whitespace-separated words
//   2 avg_word_length            char_count / word_count_raw
//   3 sentence_count             terminal-punctuation heuristic
//   4 avg_sentence_length_words  word_count_raw / sentence_count
//   5 punctuation_per_100_chars
//   6 exclamation_count
//   7 question_count
//   8 emoji_count
//   9 elongated_ratio            elongated / kept tokens
//  10 type_token_ratio           distinct / kept tokens
//  11 stopword_ratio             removed / (kept + removed) tokens
constexpr size_t kStylometricDim = 12;
extern const std::array<const char*, kStylometricDim> kStylometricFeatureNames;

std::array<double, kStylometricDim> stylometric_vector(const TokenSequence& seq);

struct TfidfConfig {
  int ngram_lo = 1;
  int ngram_hi = 2;
  size_t min_df = 2;
};

// Bigram keys join the two tokens with U+001F so tokens containing spaces
// cannot collide with a real bigram.
constexpr char kNgramJoin = '\x1F';

struct TfidfModel {
  std::map<std::string, uint64_t> vocabulary;  // ngram -> column, lexicographic
  std::vector<double> idf;                     // per column
  TfidfConfig config;
  uint64_t corpus_size = 0;
};

// Vocabulary: every ngram in [ngram_lo, ngram_hi] with document frequency
// >= min_df, columns in lexicographic key order. idf(t) = ln((1+N)/(1+df)) + 1.
TfidfModel fit_tfidf(const std::vector<const TokenSequence*>& docs, const TfidfConfig& config);
TfidfModel fit_tfidf(const std::vector<TokenSequence>& docs, const TfidfConfig& config);

// value(t) = count(t in doc) * idf(t), L2-normalized per document.
// Out-of-vocabulary ngrams are ignored; an all-OOV document maps to the
// zero vector.
SparseVector transform_tfidf(const TfidfModel& model, const TokenSequence& seq);

std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, int lo, int hi);

struct Lexicon {
  std::vector<std::string> categories;              // first-appearance order
  std::map<std::string, std::map<size_t, double>> entries;  // token -> category -> weight
};

// TSV token<TAB>category<TAB>weight; duplicate (token, category) weights sum.
Lexicon load_lexicon(const std::string& path);

// Per category: sum of entry weights over tokens, divided by token count.
std::vector<double> lexicon_vector(const TokenSequence& seq, const Lexicon& lex);

struct FeatureFile {
  std::string scheme;
  uint64_t dim = 0;
  std::array<std::string, 2> label_names;
  std::vector<std::string> doc_ids;
  std::vector<Label> labels;
  std::vector<SparseVector> rows;
};

void save_features(const FeatureFile& f, const std::string& path);
FeatureFile load_features(const std::string& path);
// Debug export: doc_id,index:value index:value ...
std::string features_csv(const FeatureFile& f);

}  // namespace stylus
