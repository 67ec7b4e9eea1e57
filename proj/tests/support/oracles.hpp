#pragma once

// Brute-force oracles used by the unit and acceptance suites. Everything in
// this header is implemented with naive loops and stays independent of the
// library code paths it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace stylus::testsupport {

// ---- TF-IDF ----------------------------------------------------------

inline std::vector<std::string> oracle_ngrams(const std::vector<std::string>& doc, int lo,
                                              int hi) {
  std::vector<std::string> out;
  for (int n = lo; n <= hi; ++n) {
    for (size_t i = 0; i + static_cast<size_t>(n) <= doc.size(); ++i) {
      std::string key;
      for (int k = 0; k < n; ++k) {
        if (k) key.push_back('\x1F');
        key += doc[i + static_cast<size_t>(k)];
      }
      out.push_back(key);
    }
  }
  return out;
}

struct OracleTfidf {
  std::map<std::string, double> idf;  // lexicographic by key

  static OracleTfidf fit(const std::vector<std::vector<std::string>>& docs, int lo, int hi,
                         size_t min_df) {
    std::map<std::string, size_t> df;
    for (const auto& doc : docs) {
      std::set<std::string> grams;
      for (const auto& g : oracle_ngrams(doc, lo, hi)) grams.insert(g);
      for (const auto& g : grams) df[g] += 1;
    }
    OracleTfidf model;
    double n = static_cast<double>(docs.size());
    for (const auto& [gram, count] : df) {
      if (count < min_df) continue;
      model.idf[gram] = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
    }
    return model;
  }

  // ngram -> L2-normalized count*idf value.
  std::map<std::string, double> transform(const std::vector<std::string>& doc, int lo,
                                          int hi) const {
    std::map<std::string, double> counts;
    for (const auto& g : oracle_ngrams(doc, lo, hi)) {
      if (idf.count(g)) counts[g] += 1.0;
    }
    double norm_sq = 0;
    for (auto& [g, c] : counts) {
      c *= idf.at(g);
      norm_sq += c * c;
    }
    if (norm_sq > 0) {
      double inv = 1.0 / std::sqrt(norm_sq);
      for (auto& [g, c] : counts) c *= inv;
    }
    return counts;
  }
};

// ---- Multinomial naive Bayes -----------------------------------------

// Closed-form log posterior (up to the shared evidence term) for dense
// non-negative feature rows with Laplace smoothing.
inline std::array<double, 2> oracle_nb_log_posterior(
    const std::vector<std::vector<double>>& x_train, const std::vector<int>& y_train,
    double alpha, const std::vector<double>& query) {
  size_t dim = query.size();
  std::array<double, 2> doc_count{0, 0};
  std::array<std::vector<double>, 2> feature_sums{std::vector<double>(dim, 0.0),
                                                  std::vector<double>(dim, 0.0)};
  for (size_t i = 0; i < x_train.size(); ++i) {
    doc_count[static_cast<size_t>(y_train[i])] += 1.0;
    for (size_t j = 0; j < dim; ++j)
      feature_sums[static_cast<size_t>(y_train[i])][j] += x_train[i][j];
  }
  std::array<double, 2> post{};
  for (size_t c = 0; c < 2; ++c) {
    post[c] = std::log(doc_count[c] / static_cast<double>(x_train.size()));
    double total = 0;
    for (size_t j = 0; j < dim; ++j) total += feature_sums[c][j];
    for (size_t j = 0; j < dim; ++j) {
      double p = (feature_sums[c][j] + alpha) / (total + alpha * static_cast<double>(dim));
      post[c] += query[j] * std::log(p);
    }
  }
  return post;
}

// ---- Metrics ----------------------------------------------------------

struct OracleMetrics {
  double accuracy, precision, recall, f1;
};

inline OracleMetrics oracle_metrics(uint64_t tp, uint64_t fp, uint64_t tn, uint64_t fn) {
  OracleMetrics m{};
  double n = static_cast<double>(tp + fp + tn + fn);
  m.accuracy = n > 0 ? (static_cast<double>(tp) + static_cast<double>(tn)) / n : 0.0;
  m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

inline double oracle_auc(const std::vector<double>& scores, const std::vector<uint8_t>& pos) {
  uint64_t numerator = 0, p = 0, n = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!pos[i]) continue;
    ++p;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (pos[j]) continue;
      if (scores[i] > scores[j]) numerator += 2;
      if (scores[i] == scores[j]) numerator += 1;
    }
  }
  for (uint8_t flag : pos) n += flag ? 0 : 1;
  return static_cast<double>(numerator) / (2.0 * static_cast<double>(p) * static_cast<double>(n));
}

// ---- Finite differences ------------------------------------------------

// Central difference of f() with respect to *param.
template <typename F>
double central_difference(F&& f, double* param, double h = 1e-5) {
  double saved = *param;
  *param = saved + h;
  double above = f();
  *param = saved - h;
  double below = f();
  *param = saved;
  return (above - below) / (2.0 * h);
}

inline double relative_error(double a, double b) {
  double denom = std::max(1e-8, std::abs(a) + std::abs(b));
  return std::abs(a - b) / denom;
}

}  // namespace stylus::testsupport
