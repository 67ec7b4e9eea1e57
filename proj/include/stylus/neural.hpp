#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stylus/common.hpp"
#include "stylus/embeddings.hpp"
#include "stylus/matrix.hpp"

namespace stylus {

enum class CellKind { Lstm, Gru };

// Standard cell equations, hidden state h of size H over inputs x of size D.
//
// LSTM (gate order: input, forget, output, candidate):
//   i = sigm(Wxi x + Whi h' + bi)      f = sigm(Wxf x + Whf h' + bf)
//   o = sigm(Wxo x + Who h' + bo)      g = tanh(Wxg x + Whg h' + bg)
//   c = f*c' + i*g                     h = o*tanh(c)
//
// GRU (gate order: update, reset, candidate):
//   z = sigm(Wxz x + Whz h' + bz)      r = sigm(Wxr x + Whr h' + br)
//   n = tanh(Wxn x + r*(Whn h') + bn)  h = (1-z)*n + z*h'
struct CellParams {
  CellKind kind = CellKind::Lstm;
  int input_dim = 0;
  int hidden_dim = 0;
  std::vector<Matrix> wx;               // per gate, H x D
  std::vector<Matrix> wh;               // per gate, H x H
  std::vector<std::vector<double>> b;   // per gate, H

  size_t gate_count() const { return kind == CellKind::Lstm ? 4 : 3; }
};

struct DenseSoftmaxHead {
  Matrix weight;             // 2 x H
  std::vector<double> bias;  // 2
};

// Token-id sequence when the classifier carries an embedding layer,
// otherwise a precomputed feature vector fed as one timestep.
struct SequenceInput {
  std::vector<uint32_t> token_ids;
  std::vector<double> dense;
};

struct RecurrentClassifier {
  CellParams cell;
  DenseSoftmaxHead head;
  std::optional<EmbeddingLayer> embedding;
  int max_seq_len = 100;  // token sequences are truncated to this length
};

// Glorot-uniform input weights, scaled-uniform recurrent weights, zero
// biases except the LSTM forget gate at 1.0. Deterministic per seed.
RecurrentClassifier make_classifier(CellKind kind, int input_dim, int hidden_dim, uint64_t seed,
                                    std::optional<EmbeddingLayer> embedding = std::nullopt,
                                    int max_seq_len = 100);

struct ForwardCache {
  size_t steps = 0;
  Matrix xs;                       // T x D inputs actually consumed
  std::vector<uint32_t> ids;      // token mode only, truncated
  std::vector<Matrix> gates;      // per gate, T x H activations
  Matrix candidate_hh;            // GRU: Whn h' per step, T x H
  Matrix hs;                       // (T+1) x H, row 0 = initial state
  Matrix cs;                       // LSTM: (T+1) x H cell states
  Matrix tanh_c;                   // LSTM: T x H
  std::array<double, 2> logits{0, 0};
  std::array<double, 2> prob{0, 0};
};

std::array<double, 2> forward(const RecurrentClassifier& model, const SequenceInput& input,
                              ForwardCache* cache = nullptr);

// -ln prob[label], probabilities clamped to [1e-12, 1-1e-12]. For two
// softmax classes this is exactly binary cross-entropy on the positive
// class probability.
double loss_bce(const std::array<double, 2>& prob, Label label);

struct Gradients {
  std::vector<Matrix> wx, wh;
  std::vector<std::vector<double>> b;
  Matrix head_weight;
  std::vector<double> head_bias;
  std::map<uint32_t, std::vector<double>> embedding_rows;  // trainable mode only

  void add(const Gradients& o);
  void scale(double s);
  double squared_norm() const;
};

Gradients zero_gradients(const RecurrentClassifier& model);

// Exact BPTT gradients of loss_bce for every parameter group; embedding
// rows receive gradients only when the layer is trainable.
Gradients backward(const RecurrentClassifier& model, const ForwardCache& cache, Label label);

struct RmspropConfig {
  double rho = 0.9;
  double lr = 0.001;
  double epsilon = 1e-8;
};

// E <- rho E + (1-rho) g^2 ; theta <- theta - lr g / sqrt(E + eps)
void rmsprop_update(double* theta, double* accum, const double* grad, size_t n,
                    const RmspropConfig& cfg);

struct RmspropState {
  std::vector<Matrix> wx, wh;
  std::vector<std::vector<double>> b;
  Matrix head_weight;
  std::vector<double> head_bias;
  Matrix embedding;  // allocated only for a trainable embedding
};

RmspropState make_rmsprop_state(const RecurrentClassifier& model);
void rmsprop_step(RmspropState& state, RecurrentClassifier& model, const Gradients& grads,
                  const RmspropConfig& cfg);

struct TrainConfig {
  int epochs = 5;
  int batch_size = 32;
  uint64_t seed = 0;
  std::optional<double> clip_norm;
  RmspropConfig optimizer;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0, train_accuracy = 0;
  double val_loss = 0, val_accuracy = 0;
};
using LearningCurve = std::vector<EpochRecord>;

std::string curve_csv(const LearningCurve& curve);

struct TrainSample {
  SequenceInput input;
  Label label = Label::ClassA;
};

// Seeded per-epoch shuffle, mean gradient per batch, one rmsprop_step per
// batch. Loss/accuracy are re-evaluated on the full train and validation
// sets after each epoch.
LearningCurve train(RecurrentClassifier& model, const std::vector<TrainSample>& train_set,
                    const std::vector<TrainSample>& val_set, const TrainConfig& config);

std::array<double, 2> predict_prob(const RecurrentClassifier& model, const SequenceInput& input);
Label predict_label(const RecurrentClassifier& model, const SequenceInput& input);

double mean_loss(const RecurrentClassifier& model, const std::vector<TrainSample>& data);

void save_checkpoint(const RecurrentClassifier& model, const std::string& path);
RecurrentClassifier load_checkpoint(const std::string& path);

uint64_t weights_hash(const Matrix& m);

}  // namespace stylus
