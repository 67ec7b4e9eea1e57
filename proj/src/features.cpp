#include "stylus/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "stylus/serialize.hpp"

namespace stylus {

namespace {
constexpr uint32_t kFeaturesKind = fourcc('F', 'E', 'A', 'T');
constexpr uint32_t kFeaturesVersion = 1;
}

const std::array<const char*, kStylometricDim> kStylometricFeatureNames = {
    "char_count",
    "word_count_raw",
    "avg_word_length",
    "sentence_count",
    "avg_sentence_length_words",
    "punctuation_per_100_chars",
    "exclamation_count",
    "question_count",
    "emoji_count",
    "elongated_ratio",
    "type_token_ratio",
    "stopword_ratio",
};

double SparseVector::l2_norm() const {
  double s = 0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0;
  size_t i = 0, j = 0;
  while (i < a.indices.size() && j < b.indices.size()) {
    if (a.indices[i] == b.indices[j]) {
      s += a.values[i] * b.values[j];
      ++i;
      ++j;
    } else if (a.indices[i] < b.indices[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

SparseVector dense_to_sparse(const std::vector<double>& v) {
  SparseVector out;
  out.dim = v.size();
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      out.indices.push_back(i);
      out.values.push_back(v[i]);
    }
  }
  return out;
}

std::vector<double> sparse_to_dense(const SparseVector& v, size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (size_t i = 0; i < v.indices.size(); ++i) {
    if (v.indices[i] < dim) out[v.indices[i]] = v.values[i];
  }
  return out;
}

std::array<double, kStylometricDim> stylometric_vector(const TokenSequence& seq) {
  const PreTokenStats& s = seq.stats;
  std::array<double, kStylometricDim> f{};
  f[0] = static_cast<double>(s.char_count);
  f[1] = static_cast<double>(s.word_count_raw);
  f[2] = s.word_count_raw > 0 ? f[0] / f[1] : 0.0;
  f[3] = static_cast<double>(s.sentence_count);
  f[4] = s.sentence_count > 0 ? f[1] / f[3] : 0.0;
  f[5] = s.char_count > 0
             ? 100.0 * static_cast<double>(s.punctuation_count) / f[0]
             : 0.0;
  f[6] = static_cast<double>(s.exclamation_count);
  f[7] = static_cast<double>(s.question_count);
  f[8] = static_cast<double>(s.emoji_count);
  size_t kept = seq.tokens.size();
  if (kept > 0) {
    size_t elong = 0;
    for (uint8_t e : seq.elongated) elong += e;
    f[9] = static_cast<double>(elong) / static_cast<double>(kept);
    std::set<std::string> types(seq.tokens.begin(), seq.tokens.end());
    f[10] = static_cast<double>(types.size()) / static_cast<double>(kept);
  }
  uint64_t pre_removal = kept + seq.stopwords_removed;
  f[11] = pre_removal > 0
              ? static_cast<double>(seq.stopwords_removed) / static_cast<double>(pre_removal)
              : 0.0;
  return f;
}

std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, int lo, int hi) {
  std::vector<std::string> grams;
  for (int n = lo; n <= hi; ++n) {
    if (n < 1 || tokens.size() < static_cast<size_t>(n)) continue;
    for (size_t i = 0; i + static_cast<size_t>(n) <= tokens.size(); ++i) {
      std::string key = tokens[i];
      for (int k = 1; k < n; ++k) {
        key.push_back(kNgramJoin);
        key += tokens[i + static_cast<size_t>(k)];
      }
      grams.push_back(std::move(key));
    }
  }
  return grams;
}

TfidfModel fit_tfidf(const std::vector<const TokenSequence*>& docs, const TfidfConfig& config) {
  if (docs.empty()) fail(ErrorCode::EmptyDataset, "tf-idf fit needs at least one document");
  if (config.ngram_lo < 1 || config.ngram_hi < config.ngram_lo)
    fail(ErrorCode::InvalidArgument, "bad ngram range");
  std::map<std::string, uint64_t> df;
  for (const TokenSequence* doc : docs) {
    auto grams = extract_ngrams(doc->tokens, config.ngram_lo, config.ngram_hi);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[g];
  }
  TfidfModel model;
  model.config = config;
  model.corpus_size = docs.size();
  double n = static_cast<double>(docs.size());
  for (const auto& [gram, count] : df) {
    if (count < config.min_df) continue;
    uint64_t col = model.vocabulary.size();
    model.vocabulary.emplace(gram, col);
    model.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  if (model.vocabulary.empty())
    fail(ErrorCode::EmptyVocabulary, "no ngram reaches min_df=" + std::to_string(config.min_df));
  return model;
}

TfidfModel fit_tfidf(const std::vector<TokenSequence>& docs, const TfidfConfig& config) {
  std::vector<const TokenSequence*> ptrs;
  ptrs.reserve(docs.size());
  for (const auto& d : docs) ptrs.push_back(&d);
  return fit_tfidf(ptrs, config);
}

SparseVector transform_tfidf(const TfidfModel& model, const TokenSequence& seq) {
  std::map<uint64_t, double> counts;
  for (const auto& gram : extract_ngrams(seq.tokens, model.config.ngram_lo, model.config.ngram_hi)) {
    auto it = model.vocabulary.find(gram);
    if (it != model.vocabulary.end()) counts[it->second] += 1.0;
  }
  SparseVector out;
  out.dim = model.vocabulary.size();
  out.indices.reserve(counts.size());
  out.values.reserve(counts.size());
  double norm_sq = 0;
  for (const auto& [col, count] : counts) {
    double v = count * model.idf[col];
    out.indices.push_back(col);
    out.values.push_back(v);
    norm_sq += v * v;
  }
  if (norm_sq > 0) {
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : out.values) v *= inv;
  }
  return out;
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open: " + path);
  Lexicon lex;
  std::map<std::string, size_t> cat_index;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    size_t t1 = line.find('\t');
    size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      fail(ErrorCode::MalformedLine,
           "line " + std::to_string(line_no) + ": expected token<TAB>category<TAB>weight");
    std::string token = line.substr(0, t1);
    std::string category = line.substr(t1 + 1, t2 - t1 - 1);
    std::string weight_str = line.substr(t2 + 1);
    if (token.empty() || category.empty())
      fail(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": empty token or category");
    char* endp = nullptr;
    double weight = std::strtod(weight_str.c_str(), &endp);
    if (endp == weight_str.c_str() || *endp != '\0' || !std::isfinite(weight))
      fail(ErrorCode::MalformedLine,
           "line " + std::to_string(line_no) + ": bad weight \"" + weight_str + "\"");
    auto [it, inserted] = cat_index.emplace(category, lex.categories.size());
    if (inserted) lex.categories.push_back(category);
    lex.entries[token][it->second] += weight;
  }
  if (lex.categories.empty()) fail(ErrorCode::MalformedLine, "lexicon has no entries");
  return lex;
}

std::vector<double> lexicon_vector(const TokenSequence& seq, const Lexicon& lex) {
  std::vector<double> out(lex.categories.size(), 0.0);
  if (seq.tokens.empty()) return out;
  for (const auto& token : seq.tokens) {
    auto it = lex.entries.find(token);
    if (it == lex.entries.end()) continue;
    for (const auto& [cat, w] : it->second) out[cat] += w;
  }
  double inv = 1.0 / static_cast<double>(seq.tokens.size());
  for (double& v : out) v *= inv;
  return out;
}

void save_features(const FeatureFile& f, const std::string& path) {
  BinaryWriter w(path);
  w.header(kFeaturesKind, kFeaturesVersion);
  w.str(f.scheme);
  w.u64(f.dim);
  w.str(f.label_names[0]);
  w.str(f.label_names[1]);
  w.u64(f.rows.size());
  for (size_t i = 0; i < f.rows.size(); ++i) {
    w.str(f.doc_ids[i]);
    w.u8(static_cast<uint8_t>(f.labels[i]));
    w.u64(f.rows[i].indices.size());
    for (size_t k = 0; k < f.rows[i].indices.size(); ++k) {
      w.u64(f.rows[i].indices[k]);
      w.f64(f.rows[i].values[k]);
    }
  }
  w.close();
}

FeatureFile load_features(const std::string& path) {
  BinaryReader r(path);
  r.header(kFeaturesKind);
  FeatureFile f;
  f.scheme = r.str();
  f.dim = r.u64();
  f.label_names[0] = r.str();
  f.label_names[1] = r.str();
  uint64_t n = r.u64();
  for (uint64_t i = 0; i < n; ++i) {
    f.doc_ids.push_back(r.str());
    f.labels.push_back(static_cast<Label>(r.u8()));
    uint64_t nnz = r.u64();
    SparseVector v;
    v.dim = f.dim;
    for (uint64_t k = 0; k < nnz; ++k) {
      v.indices.push_back(r.u64());
      v.values.push_back(r.f64());
    }
    f.rows.push_back(std::move(v));
  }
  return f;
}

std::string features_csv(const FeatureFile& f) {
  std::ostringstream out;
  out << "doc_id,features\n";
  out.precision(17);
  for (size_t i = 0; i < f.rows.size(); ++i) {
    out << f.doc_ids[i] << ",";
    for (size_t k = 0; k < f.rows[i].indices.size(); ++k) {
      if (k) out << ' ';
      out << f.rows[i].indices[k] << ':' << f.rows[i].values[k];
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace stylus
