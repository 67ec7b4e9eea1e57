#pragma once

#include <array>
#include <string>
#include <vector>

#include "stylus/common.hpp"
#include "stylus/features.hpp"
#include "stylus/matrix.hpp"

namespace stylus {

// Multinomial naive Bayes with Laplace smoothing over non-negative feature
// values (counts or TF-IDF weights treated as pseudo-counts), plus a
// Gaussian variant for dense real-valued vectors.
struct NbModel {
  bool gaussian = false;
  std::array<double, 2> log_prior{0, 0};
  Matrix log_likelihood;  // multinomial: 2 x V
  Matrix mean, variance;  // gaussian: 2 x V
  double alpha = 1.0;
  uint64_t dim = 0;
};

NbModel nb_fit(const std::vector<SparseVector>& x, const std::vector<Label>& y,
               double alpha = 1.0);
NbModel gaussian_nb_fit(const std::vector<SparseVector>& x, const std::vector<Label>& y);
// Returns (argmax class, per-class log posterior up to the shared evidence
// term). Exact ties go to ClassA.
std::pair<Label, std::array<double, 2>> nb_predict(const NbModel& model, const SparseVector& x);
// Posterior probability of ClassA.
double nb_score(const NbModel& model, const SparseVector& x);

// Primal linear SVM trained with the Pegasos stochastic subgradient method
// (step size 1/(lambda*t), unregularized bias). ClassA maps to +1.
struct SvmModel {
  std::vector<double> weight;
  double bias = 0;
  double lambda = 1e-4;
};

struct SvmConfig {
  double lambda = 1e-4;
  int epochs = 20;
  uint64_t seed = 0;
};

SvmModel svm_fit(const std::vector<SparseVector>& x, const std::vector<Label>& y,
                 const SvmConfig& config);
double svm_margin(const SvmModel& model, const SparseVector& x);  // w.x + b
Label svm_predict(const SvmModel& model, const SparseVector& x);  // margin 0 -> ClassA
// lambda/2 ||w||^2 + mean hinge loss.
double svm_objective(const SvmModel& model, const std::vector<SparseVector>& x,
                     const std::vector<Label>& y);

enum class KnnMetric { Cosine, Euclidean };

struct KnnModel {
  std::vector<SparseVector> x;
  std::vector<Label> y;
  std::vector<double> norms;
  int k = 5;
  KnnMetric metric = KnnMetric::Cosine;
};

KnnModel knn_fit(std::vector<SparseVector> x, std::vector<Label> y, int k = 5,
                 KnnMetric metric = KnnMetric::Cosine);
// Majority vote of the k nearest; distance ties resolve to the lower
// training index, vote ties to ClassA.
Label knn_predict(const KnnModel& model, const SparseVector& query);
// Fraction of the k nearest voting ClassA.
double knn_score(const KnnModel& model, const SparseVector& query);

// Greedy CART with Gini impurity and midpoint thresholds; split ties go to
// the lowest feature index, then the lowest threshold.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1, right = -1;
  std::array<uint64_t, 2> counts{0, 0};
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // node 0 is the root
  uint64_t dim = 0;
};

TreeModel tree_fit(const Matrix& x, const std::vector<Label>& y, int max_depth = 10,
                   int min_leaf = 2);
Label tree_predict(const TreeModel& model, const double* x);
double tree_score(const TreeModel& model, const double* x);  // leaf ClassA fraction

// Save/load in the same versioned binary container the neural checkpoints
// use; each model family has its own kind tag. Round trips are bit-exact.
void save_nb(const NbModel& model, const std::string& path);
NbModel load_nb(const std::string& path);
void save_svm(const SvmModel& model, const std::string& path);
SvmModel load_svm(const std::string& path);
void save_knn(const KnnModel& model, const std::string& path);
KnnModel load_knn(const std::string& path);
void save_tree(const TreeModel& model, const std::string& path);
TreeModel load_tree(const std::string& path);

}  // namespace stylus
