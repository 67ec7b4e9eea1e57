#include "stylus/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stylus/rng.hpp"
#include "stylus/serialize.hpp"

namespace stylus {

namespace {

void require_both_classes(const std::vector<Label>& y) {
  bool a = false, b = false;
  for (Label l : y) (l == Label::ClassA ? a : b) = true;
  if (!a || !b) fail(ErrorCode::InsufficientClasses, "training data must contain both classes");
}

uint64_t common_dim(const std::vector<SparseVector>& x) {
  uint64_t dim = 0;
  for (const auto& v : x) dim = std::max(dim, v.dim);
  return dim;
}

}  // namespace

NbModel nb_fit(const std::vector<SparseVector>& x, const std::vector<Label>& y, double alpha) {
  if (x.empty() || x.size() != y.size()) fail(ErrorCode::EmptyDataset, "bad naive bayes input");
  require_both_classes(y);
  NbModel m;
  m.alpha = alpha;
  m.dim = common_dim(x);
  if (m.dim == 0) fail(ErrorCode::EmptyVocabulary, "zero-dimensional features");

  std::array<double, 2> class_docs{0, 0};
  Matrix counts(2, m.dim);
  std::array<double, 2> totals{0, 0};
  for (size_t i = 0; i < x.size(); ++i) {
    size_t c = label_index(y[i]);
    class_docs[c] += 1;
    for (size_t k = 0; k < x[i].indices.size(); ++k) {
      double v = x[i].values[k];
      if (v < 0) fail(ErrorCode::NegativeFeature, "multinomial NB needs non-negative features");
      counts(c, x[i].indices[k]) += v;
      totals[c] += v;
    }
  }
  double n = static_cast<double>(x.size());
  m.log_likelihood = Matrix(2, m.dim);
  for (size_t c = 0; c < 2; ++c) {
    m.log_prior[c] = std::log(class_docs[c] / n);
    double denom = totals[c] + alpha * static_cast<double>(m.dim);
    for (size_t j = 0; j < m.dim; ++j)
      m.log_likelihood(c, j) = std::log((counts(c, j) + alpha) / denom);
  }
  return m;
}

NbModel gaussian_nb_fit(const std::vector<SparseVector>& x, const std::vector<Label>& y) {
  if (x.empty() || x.size() != y.size()) fail(ErrorCode::EmptyDataset, "bad naive bayes input");
  require_both_classes(y);
  NbModel m;
  m.gaussian = true;
  m.dim = common_dim(x);
  if (m.dim == 0) fail(ErrorCode::EmptyVocabulary, "zero-dimensional features");

  std::array<double, 2> class_docs{0, 0};
  m.mean = Matrix(2, m.dim);
  m.variance = Matrix(2, m.dim);
  for (size_t i = 0; i < x.size(); ++i) {
    size_t c = label_index(y[i]);
    class_docs[c] += 1;
    for (size_t k = 0; k < x[i].indices.size(); ++k)
      m.mean(c, x[i].indices[k]) += x[i].values[k];
  }
  for (size_t c = 0; c < 2; ++c)
    for (size_t j = 0; j < m.dim; ++j) m.mean(c, j) /= class_docs[c];
  for (size_t i = 0; i < x.size(); ++i) {
    size_t c = label_index(y[i]);
    auto dense = sparse_to_dense(x[i], m.dim);
    for (size_t j = 0; j < m.dim; ++j) {
      double d = dense[j] - m.mean(c, j);
      m.variance(c, j) += d * d;
    }
  }
  // Variance smoothing keyed to the largest overall feature variance, so
  // constant features do not produce infinite log densities.
  double max_var = 0;
  for (size_t c = 0; c < 2; ++c)
    for (size_t j = 0; j < m.dim; ++j) {
      m.variance(c, j) /= class_docs[c];
      max_var = std::max(max_var, m.variance(c, j));
    }
  double eps = std::max(1e-9 * max_var, 1e-12);
  for (double& v : m.variance.data) v += eps;
  double n = static_cast<double>(x.size());
  for (size_t c = 0; c < 2; ++c) m.log_prior[c] = std::log(class_docs[c] / n);
  return m;
}

std::pair<Label, std::array<double, 2>> nb_predict(const NbModel& model, const SparseVector& x) {
  std::array<double, 2> post = model.log_prior;
  if (model.gaussian) {
    auto dense = sparse_to_dense(x, model.dim);
    for (size_t c = 0; c < 2; ++c) {
      for (size_t j = 0; j < model.dim; ++j) {
        double var = model.variance(c, j);
        double d = dense[j] - model.mean(c, j);
        post[c] += -0.5 * std::log(2.0 * M_PI * var) - d * d / (2.0 * var);
      }
    }
  } else {
    for (size_t k = 0; k < x.indices.size(); ++k) {
      uint64_t j = x.indices[k];
      if (j >= model.dim) continue;  // unseen trailing features carry no evidence
      for (size_t c = 0; c < 2; ++c) post[c] += x.values[k] * model.log_likelihood(c, j);
    }
  }
  Label pred = post[0] >= post[1] ? Label::ClassA : Label::ClassB;
  return {pred, post};
}

double nb_score(const NbModel& model, const SparseVector& x) {
  auto [pred, post] = nb_predict(model, x);
  (void)pred;
  // Softmax over the two log posteriors, computed stably.
  double m = std::max(post[0], post[1]);
  double e0 = std::exp(post[0] - m), e1 = std::exp(post[1] - m);
  return e0 / (e0 + e1);
}

SvmModel svm_fit(const std::vector<SparseVector>& x, const std::vector<Label>& y,
                 const SvmConfig& config) {
  if (x.empty() || x.size() != y.size()) fail(ErrorCode::EmptyDataset, "bad svm input");
  require_both_classes(y);
  if (config.lambda <= 0) fail(ErrorCode::InvalidArgument, "lambda must be positive");
  SvmModel m;
  m.lambda = config.lambda;
  m.weight.assign(common_dim(x), 0.0);
  Rng rng(config.seed);
  uint64_t t = 0;
  size_t n = x.size();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t step = 0; step < n; ++step) {
      ++t;
      size_t i = static_cast<size_t>(rng.next_below(n));
      double yi = y[i] == Label::ClassA ? 1.0 : -1.0;
      double wx = m.bias;
      for (size_t k = 0; k < x[i].indices.size(); ++k)
        wx += m.weight[x[i].indices[k]] * x[i].values[k];
      double eta = 1.0 / (config.lambda * static_cast<double>(t));
      double shrink = 1.0 - eta * config.lambda;
      for (double& w : m.weight) w *= shrink;
      if (yi * wx < 1.0) {
        for (size_t k = 0; k < x[i].indices.size(); ++k)
          m.weight[x[i].indices[k]] += eta * yi * x[i].values[k];
        m.bias += eta * yi;
      }
    }
  }
  return m;
}

double svm_margin(const SvmModel& model, const SparseVector& x) {
  double s = model.bias;
  for (size_t k = 0; k < x.indices.size(); ++k) {
    if (x.indices[k] < model.weight.size()) s += model.weight[x.indices[k]] * x.values[k];
  }
  return s;
}

Label svm_predict(const SvmModel& model, const SparseVector& x) {
  return svm_margin(model, x) >= 0 ? Label::ClassA : Label::ClassB;
}

double svm_objective(const SvmModel& model, const std::vector<SparseVector>& x,
                     const std::vector<Label>& y) {
  double w2 = 0;
  for (double w : model.weight) w2 += w * w;
  double hinge = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    double yi = y[i] == Label::ClassA ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - yi * svm_margin(model, x[i]));
  }
  return 0.5 * model.lambda * w2 + hinge / static_cast<double>(x.size());
}

KnnModel knn_fit(std::vector<SparseVector> x, std::vector<Label> y, int k, KnnMetric metric) {
  if (x.empty() || x.size() != y.size()) fail(ErrorCode::EmptyDataset, "bad knn input");
  if (k < 1 || static_cast<size_t>(k) > x.size())
    fail(ErrorCode::InvalidArgument, "k must be in [1, training size]");
  KnnModel m;
  m.k = k;
  m.metric = metric;
  m.norms.reserve(x.size());
  for (const auto& v : x) m.norms.push_back(v.l2_norm());
  m.x = std::move(x);
  m.y = std::move(y);
  return m;
}

namespace {

std::vector<size_t> knn_neighbors(const KnnModel& model, const SparseVector& query) {
  double qnorm = query.l2_norm();
  std::vector<std::pair<double, size_t>> dist;
  dist.reserve(model.x.size());
  for (size_t i = 0; i < model.x.size(); ++i) {
    double d;
    if (model.metric == KnnMetric::Cosine) {
      // Zero vectors: identical to each other, maximally far from others.
      double denom = qnorm * model.norms[i];
      double sim;
      if (denom > 0) sim = dot(query, model.x[i]) / denom;
      else sim = (qnorm == 0 && model.norms[i] == 0) ? 1.0 : 0.0;
      d = 1.0 - sim;
    } else {
      double d2 = qnorm * qnorm + model.norms[i] * model.norms[i] - 2.0 * dot(query, model.x[i]);
      d = std::sqrt(std::max(0.0, d2));
    }
    dist.emplace_back(d, i);
  }
  std::sort(dist.begin(), dist.end());  // (distance, index): index breaks ties
  std::vector<size_t> out;
  out.reserve(static_cast<size_t>(model.k));
  for (int i = 0; i < model.k; ++i) out.push_back(dist[static_cast<size_t>(i)].second);
  return out;
}

}  // namespace

Label knn_predict(const KnnModel& model, const SparseVector& query) {
  size_t votes_a = 0;
  for (size_t i : knn_neighbors(model, query))
    if (model.y[i] == Label::ClassA) ++votes_a;
  return 2 * votes_a >= static_cast<size_t>(model.k) ? Label::ClassA : Label::ClassB;
}

double knn_score(const KnnModel& model, const SparseVector& query) {
  size_t votes_a = 0;
  for (size_t i : knn_neighbors(model, query))
    if (model.y[i] == Label::ClassA) ++votes_a;
  return static_cast<double>(votes_a) / static_cast<double>(model.k);
}

namespace {

double gini(const std::array<uint64_t, 2>& counts) {
  uint64_t n = counts[0] + counts[1];
  if (n == 0) return 0.0;
  double p0 = static_cast<double>(counts[0]) / static_cast<double>(n);
  double p1 = static_cast<double>(counts[1]) / static_cast<double>(n);
  return 1.0 - p0 * p0 - p1 * p1;
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0;
  double gain = 0;
};

int build_tree(TreeModel& model, const Matrix& x, const std::vector<Label>& y,
               std::vector<size_t> idx, int depth, int max_depth, int min_leaf) {
  TreeNode node;
  for (size_t i : idx) ++node.counts[label_index(y[i])];
  int node_id = static_cast<int>(model.nodes.size());
  model.nodes.push_back(node);

  double node_gini = gini(node.counts);
  bool splittable = depth < max_depth && node_gini > 0.0 &&
                    idx.size() >= 2 * static_cast<size_t>(min_leaf);
  if (!splittable) return node_id;

  SplitChoice best;
  double n = static_cast<double>(idx.size());
  std::vector<std::pair<double, size_t>> vals(idx.size());
  for (size_t f = 0; f < x.cols; ++f) {
    for (size_t i = 0; i < idx.size(); ++i) vals[i] = {x(idx[i], f), idx[i]};
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::array<uint64_t, 2> left{0, 0};
    for (size_t i = 0; i + 1 < vals.size(); ++i) {
      ++left[label_index(y[vals[i].second])];
      if (vals[i].first == vals[i + 1].first) continue;  // not a boundary
      size_t nl = i + 1, nr = vals.size() - nl;
      if (nl < static_cast<size_t>(min_leaf) || nr < static_cast<size_t>(min_leaf)) continue;
      std::array<uint64_t, 2> right{node.counts[0] - left[0], node.counts[1] - left[1]};
      double gain = node_gini - (static_cast<double>(nl) / n) * gini(left) -
                    (static_cast<double>(nr) / n) * gini(right);
      if (gain > best.gain && gain > 1e-12) {
        best.found = true;
        best.feature = static_cast<int>(f);
        best.threshold = (vals[i].first + vals[i + 1].first) / 2.0;
        best.gain = gain;
      }
    }
  }
  if (!best.found) return node_id;

  std::vector<size_t> left_idx, right_idx;
  for (size_t i : idx) {
    (x(i, static_cast<size_t>(best.feature)) <= best.threshold ? left_idx : right_idx).push_back(i);
  }
  idx.clear();
  idx.shrink_to_fit();
  int left_id = build_tree(model, x, y, std::move(left_idx), depth + 1, max_depth, min_leaf);
  int right_id = build_tree(model, x, y, std::move(right_idx), depth + 1, max_depth, min_leaf);
  model.nodes[static_cast<size_t>(node_id)].feature = best.feature;
  model.nodes[static_cast<size_t>(node_id)].threshold = best.threshold;
  model.nodes[static_cast<size_t>(node_id)].left = left_id;
  model.nodes[static_cast<size_t>(node_id)].right = right_id;
  return node_id;
}

}  // namespace

TreeModel tree_fit(const Matrix& x, const std::vector<Label>& y, int max_depth, int min_leaf) {
  if (x.rows == 0 || x.rows != y.size()) fail(ErrorCode::EmptyDataset, "bad tree input");
  if (min_leaf < 1) fail(ErrorCode::InvalidArgument, "min_leaf must be >= 1");
  TreeModel model;
  model.dim = x.cols;
  std::vector<size_t> idx(x.rows);
  std::iota(idx.begin(), idx.end(), 0);
  build_tree(model, x, y, std::move(idx), 0, max_depth, min_leaf);
  return model;
}

namespace {

const TreeNode& descend(const TreeModel& model, const double* x) {
  const TreeNode* node = &model.nodes[0];
  while (node->feature >= 0) {
    node = x[node->feature] <= node->threshold ? &model.nodes[static_cast<size_t>(node->left)]
                                               : &model.nodes[static_cast<size_t>(node->right)];
  }
  return *node;
}

}  // namespace

Label tree_predict(const TreeModel& model, const double* x) {
  const TreeNode& leaf = descend(model, x);
  return leaf.counts[0] >= leaf.counts[1] ? Label::ClassA : Label::ClassB;
}

double tree_score(const TreeModel& model, const double* x) {
  const TreeNode& leaf = descend(model, x);
  uint64_t n = leaf.counts[0] + leaf.counts[1];
  return n > 0 ? static_cast<double>(leaf.counts[0]) / static_cast<double>(n) : 0.5;
}

namespace {

constexpr uint32_t kNbKind = fourcc('N', 'B', 'M', 'D');
constexpr uint32_t kSvmKind = fourcc('S', 'V', 'M', 'D');
constexpr uint32_t kKnnKind = fourcc('K', 'N', 'N', 'D');
constexpr uint32_t kTreeKind = fourcc('T', 'R', 'E', 'E');
constexpr uint32_t kClassicVersion = 1;

void write_matrix(BinaryWriter& w, const Matrix& m) {
  w.u64(m.rows);
  w.u64(m.cols);
  for (double v : m.data) w.f64(v);
}

Matrix read_matrix(BinaryReader& r) {
  uint64_t rows = r.u64(), cols = r.u64();
  Matrix m(rows, cols);
  for (double& v : m.data) v = r.f64();
  return m;
}

void write_sparse(BinaryWriter& w, const SparseVector& v) {
  w.u64(v.dim);
  w.u64(v.indices.size());
  for (size_t i = 0; i < v.indices.size(); ++i) {
    w.u64(v.indices[i]);
    w.f64(v.values[i]);
  }
}

SparseVector read_sparse(BinaryReader& r) {
  SparseVector v;
  v.dim = r.u64();
  uint64_t nnz = r.u64();
  for (uint64_t i = 0; i < nnz; ++i) {
    v.indices.push_back(r.u64());
    v.values.push_back(r.f64());
  }
  return v;
}

}  // namespace

void save_nb(const NbModel& model, const std::string& path) {
  BinaryWriter w(path);
  w.header(kNbKind, kClassicVersion);
  w.u8(model.gaussian ? 1 : 0);
  w.f64(model.log_prior[0]);
  w.f64(model.log_prior[1]);
  w.f64(model.alpha);
  w.u64(model.dim);
  if (model.gaussian) {
    write_matrix(w, model.mean);
    write_matrix(w, model.variance);
  } else {
    write_matrix(w, model.log_likelihood);
  }
  w.close();
}

NbModel load_nb(const std::string& path) {
  BinaryReader r(path);
  r.header(kNbKind);
  NbModel m;
  m.gaussian = r.u8() != 0;
  m.log_prior[0] = r.f64();
  m.log_prior[1] = r.f64();
  m.alpha = r.f64();
  m.dim = r.u64();
  if (m.gaussian) {
    m.mean = read_matrix(r);
    m.variance = read_matrix(r);
  } else {
    m.log_likelihood = read_matrix(r);
  }
  return m;
}

void save_svm(const SvmModel& model, const std::string& path) {
  BinaryWriter w(path);
  w.header(kSvmKind, kClassicVersion);
  w.f64(model.bias);
  w.f64(model.lambda);
  w.f64_array(model.weight);
  w.close();
}

SvmModel load_svm(const std::string& path) {
  BinaryReader r(path);
  r.header(kSvmKind);
  SvmModel m;
  m.bias = r.f64();
  m.lambda = r.f64();
  m.weight = r.f64_array();
  return m;
}

void save_knn(const KnnModel& model, const std::string& path) {
  BinaryWriter w(path);
  w.header(kKnnKind, kClassicVersion);
  w.u32(static_cast<uint32_t>(model.k));
  w.u8(model.metric == KnnMetric::Cosine ? 0 : 1);
  w.u64(model.x.size());
  for (size_t i = 0; i < model.x.size(); ++i) {
    write_sparse(w, model.x[i]);
    w.u8(static_cast<uint8_t>(model.y[i]));
  }
  w.close();
}

KnnModel load_knn(const std::string& path) {
  BinaryReader r(path);
  r.header(kKnnKind);
  int k = static_cast<int>(r.u32());
  KnnMetric metric = r.u8() == 0 ? KnnMetric::Cosine : KnnMetric::Euclidean;
  uint64_t n = r.u64();
  std::vector<SparseVector> x;
  std::vector<Label> y;
  for (uint64_t i = 0; i < n; ++i) {
    x.push_back(read_sparse(r));
    y.push_back(static_cast<Label>(r.u8()));
  }
  return knn_fit(std::move(x), std::move(y), k, metric);
}

void save_tree(const TreeModel& model, const std::string& path) {
  BinaryWriter w(path);
  w.header(kTreeKind, kClassicVersion);
  w.u64(model.dim);
  w.u64(model.nodes.size());
  for (const auto& node : model.nodes) {
    w.i64(node.feature);
    w.f64(node.threshold);
    w.i64(node.left);
    w.i64(node.right);
    w.u64(node.counts[0]);
    w.u64(node.counts[1]);
  }
  w.close();
}

TreeModel load_tree(const std::string& path) {
  BinaryReader r(path);
  r.header(kTreeKind);
  TreeModel m;
  m.dim = r.u64();
  uint64_t n = r.u64();
  for (uint64_t i = 0; i < n; ++i) {
    TreeNode node;
    node.feature = static_cast<int>(r.i64());
    node.threshold = r.f64();
    node.left = static_cast<int>(r.i64());
    node.right = static_cast<int>(r.i64());
    node.counts[0] = r.u64();
    node.counts[1] = r.u64();
    m.nodes.push_back(node);
  }
  return m;
}

}  // namespace stylus
