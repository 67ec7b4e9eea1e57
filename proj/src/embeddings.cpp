#include "stylus/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stylus/serialize.hpp"

namespace stylus {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow.
double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

std::vector<std::vector<uint32_t>> encode_corpus(const std::vector<const TokenSequence*>& docs,
                                                 const Vocab& vocab) {
  std::vector<std::vector<uint32_t>> out;
  out.reserve(docs.size());
  for (const TokenSequence* doc : docs) {
    std::vector<uint32_t> ids;
    ids.reserve(doc->tokens.size());
    for (const auto& t : doc->tokens) {
      auto it = vocab.index.find(t);
      if (it != vocab.index.end()) ids.push_back(it->second);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

}  // namespace

Vocab build_vocab(const std::vector<const TokenSequence*>& docs, uint32_t min_count) {
  std::map<std::string, uint64_t> counts;
  uint64_t total = 0;
  for (const TokenSequence* doc : docs) {
    for (const auto& t : doc->tokens) {
      ++counts[t];
      ++total;
    }
  }
  std::vector<std::pair<std::string, uint64_t>> kept;
  for (auto& [tok, c] : counts) {
    if (c >= min_count) kept.emplace_back(tok, c);
  }
  if (kept.empty()) fail(ErrorCode::EmptyVocabulary, "no token reaches min_count");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocab v;
  v.min_count = min_count;
  v.total_tokens = total;
  v.tokens.reserve(kept.size());
  v.freq.reserve(kept.size());
  for (size_t i = 0; i < kept.size(); ++i) {
    v.index.emplace(kept[i].first, static_cast<uint32_t>(i));
    v.tokens.push_back(std::move(kept[i].first));
    v.freq.push_back(kept[i].second);
  }
  return v;
}

Vocab build_vocab(const std::vector<TokenSequence>& docs, uint32_t min_count) {
  std::vector<const TokenSequence*> ptrs;
  ptrs.reserve(docs.size());
  for (const auto& d : docs) ptrs.push_back(&d);
  return build_vocab(ptrs, min_count);
}

NegativeTable::NegativeTable(const Vocab& vocab) {
  cumulative_.reserve(vocab.size());
  double acc = 0;
  for (uint64_t f : vocab.freq) {
    acc += std::pow(static_cast<double>(f), 0.75);
    cumulative_.push_back(acc);
  }
}

uint32_t NegativeTable::sample(Rng& rng) const {
  double r = rng.next_unit() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
  if (it == cumulative_.end()) --it;
  return static_cast<uint32_t>(it - cumulative_.begin());
}

double NegativeTable::probability(uint32_t index) const {
  double prev = index == 0 ? 0.0 : cumulative_[index - 1];
  return (cumulative_[index] - prev) / cumulative_.back();
}

double ns_triple_loss(const std::vector<double>& h, const std::vector<double>& pos,
                      const std::vector<std::vector<double>>& negs) {
  size_t d = h.size();
  double loss = softplus(-dot_n(pos.data(), h.data(), d));
  for (const auto& n : negs) loss += softplus(dot_n(n.data(), h.data(), d));
  return loss;
}

NsTripleGrads ns_triple_gradients(const std::vector<double>& h, const std::vector<double>& pos,
                                  const std::vector<std::vector<double>>& negs) {
  size_t d = h.size();
  NsTripleGrads g;
  g.d_h.assign(d, 0.0);
  g.d_pos.assign(d, 0.0);
  double s_pos = sigmoid(dot_n(pos.data(), h.data(), d));
  g.loss = softplus(-dot_n(pos.data(), h.data(), d));
  double gp = s_pos - 1.0;
  for (size_t i = 0; i < d; ++i) {
    g.d_pos[i] = gp * h[i];
    g.d_h[i] += gp * pos[i];
  }
  g.d_negs.reserve(negs.size());
  for (const auto& n : negs) {
    double x = dot_n(n.data(), h.data(), d);
    g.loss += softplus(x);
    double gn = sigmoid(x);
    std::vector<double> dn(d);
    for (size_t i = 0; i < d; ++i) {
      dn[i] = gn * h[i];
      g.d_h[i] += gn * n[i];
    }
    g.d_negs.push_back(std::move(dn));
  }
  return g;
}

EmbeddingModel train_word2vec(const std::vector<const TokenSequence*>& docs,
                              const Word2vecConfig& config) {
  if (config.dim < 1 || config.window < 1 || config.negatives < 1)
    fail(ErrorCode::InvalidArgument, "word2vec needs dim, window and negatives >= 1");
  EmbeddingModel model;
  model.arch = config.arch;
  model.dim = config.dim;
  model.vocab = build_vocab(docs, config.min_count);
  size_t v = model.vocab.size();
  size_t d = static_cast<size_t>(config.dim);

  Rng rng(config.seed);
  model.input_vectors = Matrix(v, d);
  double half = 0.5 / static_cast<double>(d);
  for (double& x : model.input_vectors.data) x = rng.next_real(-half, half);
  model.output_vectors = Matrix(v, d);

  auto sentences = encode_corpus(docs, model.vocab);
  if (config.subsample > 0) {
    // One up-front pass so the step count (and thus the lr schedule) stays
    // exact. Keep probability follows the classic word2vec formula.
    double t = config.subsample * static_cast<double>(model.vocab.total_tokens);
    for (auto& sent : sentences) {
      std::vector<uint32_t> kept;
      kept.reserve(sent.size());
      for (uint32_t w : sent) {
        double f = static_cast<double>(model.vocab.freq[w]);
        double keep = (std::sqrt(f / t) + 1.0) * (t / f);
        if (keep >= 1.0 || rng.next_unit() < keep) kept.push_back(w);
      }
      sent = std::move(kept);
    }
  }

  const int window = config.window;
  uint64_t total_steps = 0;
  for (const auto& sent : sentences) {
    int len = static_cast<int>(sent.size());
    for (int c = 0; c < len; ++c) {
      int lo = std::max(0, c - window);
      int hi = std::min(len - 1, c + window);
      int n_ctx = hi - lo;  // excludes the center itself
      if (n_ctx <= 0) continue;
      total_steps += config.arch == W2vArch::Cbow ? 1 : static_cast<uint64_t>(n_ctx);
    }
  }
  total_steps *= static_cast<uint64_t>(config.epochs);

  NegativeTable table(model.vocab);
  const double lr_end = config.lr_start / 10.0;
  uint64_t step = 0;
  auto lr_at = [&](uint64_t s) {
    if (total_steps <= 1) return config.lr_start;
    double frac = static_cast<double>(s) / static_cast<double>(total_steps - 1);
    return config.lr_start - (config.lr_start - lr_end) * frac;
  };

  std::vector<double> h(d), d_h(d);
  std::vector<uint32_t> neg_ids;
  neg_ids.reserve(static_cast<size_t>(config.negatives));

  // One logistic update for the hidden vector h against (positive, negatives).
  // Output rows are refreshed in place; the h-gradient is left in d_h.
  auto ns_update = [&](uint32_t positive, double lr, double& loss_sink) {
    std::fill(d_h.begin(), d_h.end(), 0.0);
    neg_ids.clear();
    for (int k = 0; k < config.negatives; ++k) {
      uint32_t neg = table.sample(rng);
      if (neg != positive) neg_ids.push_back(neg);
    }
    double* u_pos = model.output_vectors.row(positive);
    double x = dot_n(u_pos, h.data(), d);
    loss_sink += softplus(-x);
    double gp = sigmoid(x) - 1.0;
    for (size_t i = 0; i < d; ++i) {
      d_h[i] += gp * u_pos[i];
      u_pos[i] -= lr * gp * h[i];
    }
    for (uint32_t neg : neg_ids) {
      double* u_neg = model.output_vectors.row(neg);
      double xn = dot_n(u_neg, h.data(), d);
      loss_sink += softplus(xn);
      double gn = sigmoid(xn);
      for (size_t i = 0; i < d; ++i) {
        d_h[i] += gn * u_neg[i];
        u_neg[i] -= lr * gn * h[i];
      }
    }
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0;
    for (const auto& sent : sentences) {
      int len = static_cast<int>(sent.size());
      for (int c = 0; c < len; ++c) {
        int lo = std::max(0, c - window);
        int hi = std::min(len - 1, c + window);
        int n_ctx = hi - lo;
        if (n_ctx <= 0) continue;
        if (config.arch == W2vArch::Cbow) {
          double lr = lr_at(step++);
          std::fill(h.begin(), h.end(), 0.0);
          for (int p = lo; p <= hi; ++p) {
            if (p == c) continue;
            const double* row = model.input_vectors.row(sent[static_cast<size_t>(p)]);
            for (size_t i = 0; i < d; ++i) h[i] += row[i];
          }
          double inv = 1.0 / static_cast<double>(n_ctx);
          for (size_t i = 0; i < d; ++i) h[i] *= inv;
          ns_update(sent[static_cast<size_t>(c)], lr, epoch_loss);
          for (int p = lo; p <= hi; ++p) {
            if (p == c) continue;
            double* row = model.input_vectors.row(sent[static_cast<size_t>(p)]);
            for (size_t i = 0; i < d; ++i) row[i] -= lr * d_h[i] * inv;
          }
        } else {
          uint32_t center = sent[static_cast<size_t>(c)];
          for (int p = lo; p <= hi; ++p) {
            if (p == c) continue;
            double lr = lr_at(step++);
            const double* center_row = model.input_vectors.row(center);
            std::copy(center_row, center_row + d, h.begin());
            ns_update(sent[static_cast<size_t>(p)], lr, epoch_loss);
            double* row = model.input_vectors.row(center);
            for (size_t i = 0; i < d; ++i) row[i] -= lr * d_h[i];
          }
        }
      }
    }
    model.epoch_losses.push_back(epoch_loss);
  }
  return model;
}

EmbeddingModel train_word2vec(const std::vector<TokenSequence>& docs,
                              const Word2vecConfig& config) {
  std::vector<const TokenSequence*> ptrs;
  ptrs.reserve(docs.size());
  for (const auto& doc : docs) ptrs.push_back(&doc);
  return train_word2vec(ptrs, config);
}

EmbeddingLayer mount_layer(const EmbeddingModel& model, bool trainable, uint64_t seed) {
  EmbeddingLayer layer;
  layer.trainable = trainable;
  size_t v = model.vocab.size();
  size_t d = static_cast<size_t>(model.dim);
  layer.matrix = Matrix(v + EmbeddingLayer::kReservedRows, d);
  Rng rng(derive_seed(seed, 0x170u));
  double half = 0.5 / static_cast<double>(d);
  double* unk = layer.matrix.row(EmbeddingLayer::kUnk);
  for (size_t i = 0; i < d; ++i) unk[i] = rng.next_real(-half, half);
  for (size_t r = 0; r < v; ++r) {
    const double* src = model.input_vectors.row(r);
    std::copy(src, src + d, layer.matrix.row(r + EmbeddingLayer::kReservedRows));
  }
  return layer;
}

std::vector<uint32_t> encode_tokens(const Vocab& vocab, const std::vector<std::string>& tokens) {
  std::vector<uint32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = vocab.index.find(t);
    ids.push_back(it == vocab.index.end() ? EmbeddingLayer::kUnk
                                          : it->second + EmbeddingLayer::kReservedRows);
  }
  return ids;
}

Matrix lookup(const EmbeddingLayer& layer, const std::vector<uint32_t>& ids) {
  Matrix out(ids.size(), layer.matrix.cols);
  for (size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] >= layer.matrix.rows)
      fail(ErrorCode::IndexOutOfRange,
           "embedding index " + std::to_string(ids[t]) + " out of range (rows=" +
               std::to_string(layer.matrix.rows) + ")");
    const double* src = layer.matrix.row(ids[t]);
    std::copy(src, src + layer.matrix.cols, out.row(t));
  }
  return out;
}

std::vector<double> mean_embedding(const EmbeddingModel& model, const TokenSequence& seq) {
  std::vector<double> out(static_cast<size_t>(model.dim), 0.0);
  size_t hits = 0;
  for (const auto& t : seq.tokens) {
    auto it = model.vocab.index.find(t);
    if (it == model.vocab.index.end()) continue;
    const double* row = model.input_vectors.row(it->second);
    for (size_t i = 0; i < out.size(); ++i) out[i] += row[i];
    ++hits;
  }
  if (hits > 0) {
    double inv = 1.0 / static_cast<double>(hits);
    for (double& x : out) x *= inv;
  }
  return out;
}

void save_word2vec_text(const EmbeddingModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open for writing: " + path);
  out << model.vocab.size() << ' ' << model.dim << '\n';
  char buf[64];
  for (size_t r = 0; r < model.vocab.size(); ++r) {
    out << model.vocab.tokens[r];
    const double* row = model.input_vectors.row(r);
    for (int j = 0; j < model.dim; ++j) {
      std::snprintf(buf, sizeof(buf), " %.6f", row[static_cast<size_t>(j)]);
      out << buf;
    }
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

EmbeddingModel load_word2vec_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open: " + path);
  size_t v = 0;
  int d = 0;
  if (!(in >> v >> d) || d < 1)
    fail(ErrorCode::MalformedLine, "line 1: expected \"V D\" header in " + path);
  EmbeddingModel model;
  model.dim = d;
  model.input_vectors = Matrix(v, static_cast<size_t>(d));
  model.output_vectors = Matrix(v, static_cast<size_t>(d));
  model.vocab.min_count = 1;
  for (size_t r = 0; r < v; ++r) {
    std::string token;
    if (!(in >> token))
      fail(ErrorCode::MalformedLine, "line " + std::to_string(r + 2) + ": missing token");
    double* row = model.input_vectors.row(r);
    for (int j = 0; j < d; ++j) {
      if (!(in >> row[j]))
        fail(ErrorCode::MalformedLine, "line " + std::to_string(r + 2) + ": missing value");
    }
    if (model.vocab.index.count(token))
      fail(ErrorCode::DuplicateId, "duplicate token \"" + token + "\" in " + path);
    model.vocab.index.emplace(token, static_cast<uint32_t>(r));
    model.vocab.tokens.push_back(token);
    model.vocab.freq.push_back(0);  // text format carries no frequencies
  }
  return model;
}

}  // namespace stylus
