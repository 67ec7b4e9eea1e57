#pragma once

#include <map>
#include <string>
#include <vector>

#include "stylus/common.hpp"
#include "stylus/matrix.hpp"
#include "stylus/preprocess.hpp"
#include "stylus/rng.hpp"

namespace stylus {

struct Vocab {
  std::vector<std::string> tokens;        // index -> token
  std::map<std::string, uint32_t> index;  // token -> index
  std::vector<uint64_t> freq;             // per index
  uint64_t total_tokens = 0;
  uint32_t min_count = 1;

  size_t size() const { return tokens.size(); }
};

// Tokens with frequency >= min_count, ordered by descending frequency with
// lexicographic tie-break.
Vocab build_vocab(const std::vector<const TokenSequence*>& docs, uint32_t min_count);
Vocab build_vocab(const std::vector<TokenSequence>& docs, uint32_t min_count);

enum class W2vArch { Cbow, SkipGram };

struct Word2vecConfig {
  W2vArch arch = W2vArch::Cbow;
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double lr_start = 0.025;
  uint32_t min_count = 2;
  double subsample = 0.0;  // 0 disables frequency subsampling
  uint64_t seed = 1;
};

struct EmbeddingModel {
  Vocab vocab;
  Matrix input_vectors;   // V x D
  Matrix output_vectors;  // V x D
  W2vArch arch = W2vArch::Cbow;
  int dim = 0;
  std::vector<double> epoch_losses;  // total negative-sampling loss per epoch
};

// Negative-sampling word2vec. The learning rate decays linearly from
// lr_start to lr_start/10 across all training steps (CBOW: one step per
// center position; skip-gram: one per (center, context) pair). Fixed
// symmetric context window. Bit-deterministic for a given seed.
EmbeddingModel train_word2vec(const std::vector<const TokenSequence*>& docs,
                              const Word2vecConfig& config);
EmbeddingModel train_word2vec(const std::vector<TokenSequence>& docs,
                              const Word2vecConfig& config);

// Loss and analytic gradients for one (h, positive, negatives) triple:
//   L = softplus(-u_pos.h) + sum_n softplus(u_n.h)
// Exposed so the trainer and the finite-difference checks share one
// definition of the objective.
double ns_triple_loss(const std::vector<double>& h, const std::vector<double>& pos,
                      const std::vector<std::vector<double>>& negs);

struct NsTripleGrads {
  double loss = 0;
  std::vector<double> d_h, d_pos;
  std::vector<std::vector<double>> d_negs;
};
NsTripleGrads ns_triple_gradients(const std::vector<double>& h, const std::vector<double>& pos,
                                  const std::vector<std::vector<double>>& negs);

// Draws negatives proportional to frequency^0.75 by inverse-CDF lookup.
class NegativeTable {
 public:
  explicit NegativeTable(const Vocab& vocab);
  uint32_t sample(Rng& rng) const;
  double probability(uint32_t index) const;

 private:
  std::vector<double> cumulative_;
};

// Embedding matrix as mounted in a network: row 0 is the padding row and
// stays exactly zero, row 1 is the unknown-token row, vocabulary rows start
// at 2. With trainable=false the matrix is bit-identical before and after
// any downstream training.
struct EmbeddingLayer {
  static constexpr uint32_t kPad = 0;
  static constexpr uint32_t kUnk = 1;
  static constexpr uint32_t kReservedRows = 2;

  Matrix matrix;  // (V+2) x D
  bool trainable = false;
};

EmbeddingLayer mount_layer(const EmbeddingModel& model, bool trainable, uint64_t seed = 0);

// token -> vocab index + 2; unknown tokens -> kUnk.
std::vector<uint32_t> encode_tokens(const Vocab& vocab, const std::vector<std::string>& tokens);

// Row-gather of the given indices; throws IndexOutOfRange past V+2.
Matrix lookup(const EmbeddingLayer& layer, const std::vector<uint32_t>& ids);

// Mean of the input vectors of in-vocabulary tokens; zero vector when none.
// This is the document representation handed to the traditional models.
std::vector<double> mean_embedding(const EmbeddingModel& model, const TokenSequence& seq);

// word2vec text format: "V D" header, then "token v1 ... vD" per line with
// 6-decimal fixed precision.
void save_word2vec_text(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_word2vec_text(const std::string& path);

}  // namespace stylus
