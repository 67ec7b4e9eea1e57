#include "stylus/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "stylus/rng.hpp"
#include "stylus/serialize.hpp"

namespace stylus {

namespace {

constexpr uint32_t kModelKind = fourcc('M', 'O', 'D', 'L');
constexpr uint32_t kModelVersion = 1;

constexpr size_t kLstmInput = 0, kLstmForget = 1, kLstmOutput = 2, kLstmCand = 3;
constexpr size_t kGruUpdate = 0, kGruReset = 1, kGruCand = 2;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::ShapeMismatch, what);
}

}  // namespace

RecurrentClassifier make_classifier(CellKind kind, int input_dim, int hidden_dim, uint64_t seed,
                                    std::optional<EmbeddingLayer> embedding, int max_seq_len) {
  if (input_dim < 1 || hidden_dim < 1)
    fail(ErrorCode::InvalidArgument, "input_dim and hidden_dim must be >= 1");
  if (embedding && embedding->matrix.cols != static_cast<size_t>(input_dim))
    fail(ErrorCode::ShapeMismatch, "embedding width does not match input_dim");
  RecurrentClassifier m;
  m.cell.kind = kind;
  m.cell.input_dim = input_dim;
  m.cell.hidden_dim = hidden_dim;
  m.embedding = std::move(embedding);
  m.max_seq_len = max_seq_len;

  size_t gates = m.cell.gate_count();
  size_t d = static_cast<size_t>(input_dim), h = static_cast<size_t>(hidden_dim);
  Rng rng(seed);
  double limit_x = std::sqrt(6.0 / static_cast<double>(d + h));
  double limit_h = 1.0 / std::sqrt(static_cast<double>(h));
  for (size_t g = 0; g < gates; ++g) {
    Matrix wx(h, d);
    for (double& v : wx.data) v = rng.next_real(-limit_x, limit_x);
    m.cell.wx.push_back(std::move(wx));
    Matrix wh(h, h);
    for (double& v : wh.data) v = rng.next_real(-limit_h, limit_h);
    m.cell.wh.push_back(std::move(wh));
    m.cell.b.emplace_back(h, 0.0);
  }
  if (kind == CellKind::Lstm)
    std::fill(m.cell.b[kLstmForget].begin(), m.cell.b[kLstmForget].end(), 1.0);

  double limit_head = std::sqrt(6.0 / static_cast<double>(h + 2));
  m.head.weight = Matrix(2, h);
  for (double& v : m.head.weight.data) v = rng.next_real(-limit_head, limit_head);
  m.head.bias.assign(2, 0.0);
  return m;
}

std::array<double, 2> forward(const RecurrentClassifier& model, const SequenceInput& input,
                              ForwardCache* cache) {
  const CellParams& cell = model.cell;
  size_t d = static_cast<size_t>(cell.input_dim);
  size_t h = static_cast<size_t>(cell.hidden_dim);

  ForwardCache local;
  ForwardCache& cc = cache ? *cache : local;
  cc = ForwardCache{};

  if (model.embedding) {
    cc.ids = input.token_ids;
    if (cc.ids.size() > static_cast<size_t>(model.max_seq_len))
      cc.ids.resize(static_cast<size_t>(model.max_seq_len));
    check(!cc.ids.empty(), "token sequence must have length >= 1");
    cc.xs = lookup(*model.embedding, cc.ids);
  } else {
    check(input.dense.size() == d, "dense input width does not match input_dim");
    cc.xs = Matrix(1, d);
    std::copy(input.dense.begin(), input.dense.end(), cc.xs.row(0));
  }
  size_t t_steps = cc.xs.rows;
  cc.steps = t_steps;

  size_t gates = cell.gate_count();
  cc.gates.assign(gates, Matrix(t_steps, h));
  cc.hs = Matrix(t_steps + 1, h);
  if (cell.kind == CellKind::Lstm) {
    cc.cs = Matrix(t_steps + 1, h);
    cc.tanh_c = Matrix(t_steps, h);
  } else {
    cc.candidate_hh = Matrix(t_steps, h);
  }

  std::vector<double> a(h);
  for (size_t t = 0; t < t_steps; ++t) {
    const double* x = cc.xs.row(t);
    const double* h_prev = cc.hs.row(t);
    if (cell.kind == CellKind::Lstm) {
      const double* c_prev = cc.cs.row(t);
      for (size_t g = 0; g < 4; ++g) {
        std::copy(cell.b[g].begin(), cell.b[g].end(), a.begin());
        gemv_accum(cell.wx[g], x, a.data());
        gemv_accum(cell.wh[g], h_prev, a.data());
        double* out = cc.gates[g].row(t);
        if (g == kLstmCand)
          for (size_t j = 0; j < h; ++j) out[j] = std::tanh(a[j]);
        else
          for (size_t j = 0; j < h; ++j) out[j] = sigmoid(a[j]);
      }
      const double* gi = cc.gates[kLstmInput].row(t);
      const double* gf = cc.gates[kLstmForget].row(t);
      const double* go = cc.gates[kLstmOutput].row(t);
      const double* gc = cc.gates[kLstmCand].row(t);
      double* c = cc.cs.row(t + 1);
      double* tc = cc.tanh_c.row(t);
      double* h_now = cc.hs.row(t + 1);
      for (size_t j = 0; j < h; ++j) {
        c[j] = gf[j] * c_prev[j] + gi[j] * gc[j];
        tc[j] = std::tanh(c[j]);
        h_now[j] = go[j] * tc[j];
      }
    } else {
      for (size_t g : {kGruUpdate, kGruReset}) {
        std::copy(cell.b[g].begin(), cell.b[g].end(), a.begin());
        gemv_accum(cell.wx[g], x, a.data());
        gemv_accum(cell.wh[g], h_prev, a.data());
        double* out = cc.gates[g].row(t);
        for (size_t j = 0; j < h; ++j) out[j] = sigmoid(a[j]);
      }
      double* hh = cc.candidate_hh.row(t);
      std::fill(hh, hh + h, 0.0);
      gemv_accum(cell.wh[kGruCand], h_prev, hh);
      const double* r = cc.gates[kGruReset].row(t);
      std::copy(cell.b[kGruCand].begin(), cell.b[kGruCand].end(), a.begin());
      gemv_accum(cell.wx[kGruCand], x, a.data());
      double* n = cc.gates[kGruCand].row(t);
      for (size_t j = 0; j < h; ++j) n[j] = std::tanh(a[j] + r[j] * hh[j]);
      const double* z = cc.gates[kGruUpdate].row(t);
      double* h_now = cc.hs.row(t + 1);
      for (size_t j = 0; j < h; ++j) h_now[j] = (1.0 - z[j]) * n[j] + z[j] * h_prev[j];
    }
  }

  const double* h_last = cc.hs.row(t_steps);
  for (size_t k = 0; k < 2; ++k)
    cc.logits[k] = dot_n(model.head.weight.row(k), h_last, h) + model.head.bias[k];
  double m = std::max(cc.logits[0], cc.logits[1]);
  double e0 = std::exp(cc.logits[0] - m), e1 = std::exp(cc.logits[1] - m);
  cc.prob = {e0 / (e0 + e1), e1 / (e0 + e1)};
  return cc.prob;
}

double loss_bce(const std::array<double, 2>& prob, Label label) {
  double p = prob[label_index(label)];
  p = std::min(1.0 - 1e-12, std::max(1e-12, p));
  return -std::log(p);
}

Gradients zero_gradients(const RecurrentClassifier& model) {
  Gradients g;
  size_t d = static_cast<size_t>(model.cell.input_dim);
  size_t h = static_cast<size_t>(model.cell.hidden_dim);
  for (size_t i = 0; i < model.cell.gate_count(); ++i) {
    g.wx.emplace_back(h, d);
    g.wh.emplace_back(h, h);
    g.b.emplace_back(h, 0.0);
  }
  g.head_weight = Matrix(2, h);
  g.head_bias.assign(2, 0.0);
  return g;
}

void Gradients::add(const Gradients& o) {
  for (size_t g = 0; g < wx.size(); ++g) {
    for (size_t i = 0; i < wx[g].data.size(); ++i) wx[g].data[i] += o.wx[g].data[i];
    for (size_t i = 0; i < wh[g].data.size(); ++i) wh[g].data[i] += o.wh[g].data[i];
    for (size_t i = 0; i < b[g].size(); ++i) b[g][i] += o.b[g][i];
  }
  for (size_t i = 0; i < head_weight.data.size(); ++i)
    head_weight.data[i] += o.head_weight.data[i];
  for (size_t i = 0; i < head_bias.size(); ++i) head_bias[i] += o.head_bias[i];
  for (const auto& [row, vec] : o.embedding_rows) {
    auto& dst = embedding_rows[row];
    if (dst.empty()) dst.assign(vec.size(), 0.0);
    for (size_t i = 0; i < vec.size(); ++i) dst[i] += vec[i];
  }
}

void Gradients::scale(double s) {
  for (auto& m : wx)
    for (double& v : m.data) v *= s;
  for (auto& m : wh)
    for (double& v : m.data) v *= s;
  for (auto& vec : b)
    for (double& v : vec) v *= s;
  for (double& v : head_weight.data) v *= s;
  for (double& v : head_bias) v *= s;
  for (auto& [row, vec] : embedding_rows)
    for (double& v : vec) v *= s;
}

double Gradients::squared_norm() const {
  double s = 0;
  auto acc = [&s](const std::vector<double>& v) {
    for (double x : v) s += x * x;
  };
  for (const auto& m : wx) acc(m.data);
  for (const auto& m : wh) acc(m.data);
  for (const auto& vec : b) acc(vec);
  acc(head_weight.data);
  acc(head_bias);
  for (const auto& [row, vec] : embedding_rows) acc(vec);
  return s;
}

Gradients backward(const RecurrentClassifier& model, const ForwardCache& cache, Label label) {
  check(cache.steps >= 1, "backward needs a forward cache");
  const CellParams& cell = model.cell;
  size_t h = static_cast<size_t>(cell.hidden_dim);
  size_t t_steps = cache.steps;
  Gradients grads = zero_gradients(model);

  std::array<double, 2> dlogits = cache.prob;
  dlogits[label_index(label)] -= 1.0;

  std::vector<double> dh(h, 0.0);
  const double* h_last = cache.hs.row(t_steps);
  for (size_t k = 0; k < 2; ++k) {
    double* wrow = grads.head_weight.row(k);
    const double* mrow = model.head.weight.row(k);
    for (size_t j = 0; j < h; ++j) {
      wrow[j] += dlogits[k] * h_last[j];
      dh[j] += dlogits[k] * mrow[j];
    }
    grads.head_bias[k] += dlogits[k];
  }

  bool want_dx = model.embedding && model.embedding->trainable;
  std::vector<double> dx(want_dx ? static_cast<size_t>(cell.input_dim) : 0);
  std::vector<double> dc(cell.kind == CellKind::Lstm ? h : 0, 0.0);
  std::vector<double> dh_prev(h), da(h), scratch(h);

  for (size_t t = t_steps; t-- > 0;) {
    const double* x = cache.xs.row(t);
    const double* h_prev = cache.hs.row(t);
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    if (want_dx) std::fill(dx.begin(), dx.end(), 0.0);

    if (cell.kind == CellKind::Lstm) {
      const double* gi = cache.gates[kLstmInput].row(t);
      const double* gf = cache.gates[kLstmForget].row(t);
      const double* go = cache.gates[kLstmOutput].row(t);
      const double* gc = cache.gates[kLstmCand].row(t);
      const double* tc = cache.tanh_c.row(t);
      const double* c_prev = cache.cs.row(t);

      for (size_t j = 0; j < h; ++j) dc[j] += dh[j] * go[j] * (1.0 - tc[j] * tc[j]);

      auto apply_gate = [&](size_t gate, const double* da_vec) {
        outer_accum(grads.wx[gate], da_vec, x);
        outer_accum(grads.wh[gate], da_vec, h_prev);
        for (size_t j = 0; j < h; ++j) grads.b[gate][j] += da_vec[j];
        gemv_t_accum(cell.wh[gate], da_vec, dh_prev.data());
        if (want_dx) gemv_t_accum(cell.wx[gate], da_vec, dx.data());
      };

      for (size_t j = 0; j < h; ++j) da[j] = dh[j] * tc[j] * go[j] * (1.0 - go[j]);
      apply_gate(kLstmOutput, da.data());
      for (size_t j = 0; j < h; ++j) da[j] = dc[j] * c_prev[j] * gf[j] * (1.0 - gf[j]);
      apply_gate(kLstmForget, da.data());
      for (size_t j = 0; j < h; ++j) da[j] = dc[j] * gc[j] * gi[j] * (1.0 - gi[j]);
      apply_gate(kLstmInput, da.data());
      for (size_t j = 0; j < h; ++j) da[j] = dc[j] * gi[j] * (1.0 - gc[j] * gc[j]);
      apply_gate(kLstmCand, da.data());

      for (size_t j = 0; j < h; ++j) dc[j] *= gf[j];
    } else {
      const double* z = cache.gates[kGruUpdate].row(t);
      const double* r = cache.gates[kGruReset].row(t);
      const double* n = cache.gates[kGruCand].row(t);
      const double* hh = cache.candidate_hh.row(t);

      // update gate
      for (size_t j = 0; j < h; ++j) da[j] = dh[j] * (h_prev[j] - n[j]) * z[j] * (1.0 - z[j]);
      outer_accum(grads.wx[kGruUpdate], da.data(), x);
      outer_accum(grads.wh[kGruUpdate], da.data(), h_prev);
      for (size_t j = 0; j < h; ++j) grads.b[kGruUpdate][j] += da[j];
      gemv_t_accum(cell.wh[kGruUpdate], da.data(), dh_prev.data());
      if (want_dx) gemv_t_accum(cell.wx[kGruUpdate], da.data(), dx.data());

      // candidate pre-activation gradient, reused for reset gate
      for (size_t j = 0; j < h; ++j) scratch[j] = dh[j] * (1.0 - z[j]) * (1.0 - n[j] * n[j]);
      outer_accum(grads.wx[kGruCand], scratch.data(), x);
      for (size_t j = 0; j < h; ++j) grads.b[kGruCand][j] += scratch[j];
      if (want_dx) gemv_t_accum(cell.wx[kGruCand], scratch.data(), dx.data());

      for (size_t j = 0; j < h; ++j) da[j] = scratch[j] * hh[j] * r[j] * (1.0 - r[j]);
      outer_accum(grads.wx[kGruReset], da.data(), x);
      outer_accum(grads.wh[kGruReset], da.data(), h_prev);
      for (size_t j = 0; j < h; ++j) grads.b[kGruReset][j] += da[j];
      gemv_t_accum(cell.wh[kGruReset], da.data(), dh_prev.data());
      if (want_dx) gemv_t_accum(cell.wx[kGruReset], da.data(), dx.data());

      // candidate recurrent weights see r * da_n
      for (size_t j = 0; j < h; ++j) scratch[j] *= r[j];
      outer_accum(grads.wh[kGruCand], scratch.data(), h_prev);
      gemv_t_accum(cell.wh[kGruCand], scratch.data(), dh_prev.data());

      for (size_t j = 0; j < h; ++j) dh_prev[j] += dh[j] * z[j];
    }

    if (want_dx) {
      auto& row_grad = grads.embedding_rows[cache.ids[t]];
      if (row_grad.empty()) row_grad.assign(dx.size(), 0.0);
      for (size_t j = 0; j < dx.size(); ++j) row_grad[j] += dx[j];
    }
    dh = dh_prev;
  }
  return grads;
}

void rmsprop_update(double* theta, double* accum, const double* grad, size_t n,
                    const RmspropConfig& cfg) {
  for (size_t i = 0; i < n; ++i) {
    accum[i] = cfg.rho * accum[i] + (1.0 - cfg.rho) * grad[i] * grad[i];
    theta[i] -= cfg.lr * grad[i] / std::sqrt(accum[i] + cfg.epsilon);
  }
}

RmspropState make_rmsprop_state(const RecurrentClassifier& model) {
  RmspropState s;
  size_t d = static_cast<size_t>(model.cell.input_dim);
  size_t h = static_cast<size_t>(model.cell.hidden_dim);
  for (size_t g = 0; g < model.cell.gate_count(); ++g) {
    s.wx.emplace_back(h, d);
    s.wh.emplace_back(h, h);
    s.b.emplace_back(h, 0.0);
  }
  s.head_weight = Matrix(2, h);
  s.head_bias.assign(2, 0.0);
  if (model.embedding && model.embedding->trainable)
    s.embedding = Matrix(model.embedding->matrix.rows, model.embedding->matrix.cols);
  return s;
}

void rmsprop_step(RmspropState& state, RecurrentClassifier& model, const Gradients& grads,
                  const RmspropConfig& cfg) {
  CellParams& cell = model.cell;
  check(grads.wx.size() == cell.gate_count(), "gradient/model gate mismatch");
  for (size_t g = 0; g < cell.gate_count(); ++g) {
    rmsprop_update(cell.wx[g].data.data(), state.wx[g].data.data(), grads.wx[g].data.data(),
                   cell.wx[g].data.size(), cfg);
    rmsprop_update(cell.wh[g].data.data(), state.wh[g].data.data(), grads.wh[g].data.data(),
                   cell.wh[g].data.size(), cfg);
    rmsprop_update(cell.b[g].data(), state.b[g].data(), grads.b[g].data(), cell.b[g].size(), cfg);
  }
  rmsprop_update(model.head.weight.data.data(), state.head_weight.data.data(),
                 grads.head_weight.data.data(), model.head.weight.data.size(), cfg);
  rmsprop_update(model.head.bias.data(), state.head_bias.data(), grads.head_bias.data(),
                 model.head.bias.size(), cfg);
  if (!grads.embedding_rows.empty()) {
    check(model.embedding && model.embedding->trainable,
          "embedding gradients on a frozen or absent layer");
    for (const auto& [row, vec] : grads.embedding_rows) {
      if (row == EmbeddingLayer::kPad) continue;  // padding row stays zero
      rmsprop_update(model.embedding->matrix.row(row), state.embedding.row(row), vec.data(),
                     vec.size(), cfg);
    }
  }
}

std::array<double, 2> predict_prob(const RecurrentClassifier& model, const SequenceInput& input) {
  return forward(model, input, nullptr);
}

Label predict_label(const RecurrentClassifier& model, const SequenceInput& input) {
  auto p = predict_prob(model, input);
  return p[0] >= p[1] ? Label::ClassA : Label::ClassB;
}

double mean_loss(const RecurrentClassifier& model, const std::vector<TrainSample>& data) {
  if (data.empty()) return 0.0;
  double total = 0;
  for (const auto& s : data) total += loss_bce(predict_prob(model, s.input), s.label);
  return total / static_cast<double>(data.size());
}

namespace {

std::pair<double, double> loss_and_accuracy(const RecurrentClassifier& model,
                                            const std::vector<TrainSample>& data) {
  if (data.empty()) return {0.0, 0.0};
  double total = 0;
  size_t correct = 0;
  for (const auto& s : data) {
    auto p = predict_prob(model, s.input);
    total += loss_bce(p, s.label);
    Label pred = p[0] >= p[1] ? Label::ClassA : Label::ClassB;
    if (pred == s.label) ++correct;
  }
  return {total / static_cast<double>(data.size()),
          static_cast<double>(correct) / static_cast<double>(data.size())};
}

}  // namespace

LearningCurve train(RecurrentClassifier& model, const std::vector<TrainSample>& train_set,
                    const std::vector<TrainSample>& val_set, const TrainConfig& config) {
  if (train_set.empty()) fail(ErrorCode::EmptyDataset, "training set is empty");
  if (config.batch_size < 1) fail(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  LearningCurve curve;
  if (config.epochs <= 0) return curve;

  RmspropState state = make_rmsprop_state(model);
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  ForwardCache cache;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, static_cast<uint64_t>(epoch)));
    fisher_yates(order, rng);
    size_t n = order.size();
    size_t bs = static_cast<size_t>(config.batch_size);
    for (size_t start = 0; start < n; start += bs) {
      size_t end = std::min(n, start + bs);
      Gradients batch_grads = zero_gradients(model);
      for (size_t k = start; k < end; ++k) {
        const TrainSample& s = train_set[order[k]];
        forward(model, s.input, &cache);
        batch_grads.add(backward(model, cache, s.label));
      }
      batch_grads.scale(1.0 / static_cast<double>(end - start));
      if (config.clip_norm) {
        double norm = std::sqrt(batch_grads.squared_norm());
        if (norm > *config.clip_norm && norm > 0) batch_grads.scale(*config.clip_norm / norm);
      }
      rmsprop_step(state, model, batch_grads, config.optimizer);
    }
    auto [train_loss, train_acc] = loss_and_accuracy(model, train_set);
    auto [val_loss, val_acc] = loss_and_accuracy(model, val_set);
    curve.push_back({epoch, train_loss, train_acc, val_loss, val_acc});
  }
  return curve;
}

std::string curve_csv(const LearningCurve& curve) {
  std::ostringstream out;
  out.precision(10);
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& r : curve)
    out << r.epoch << ',' << r.train_loss << ',' << r.train_accuracy << ',' << r.val_loss << ','
        << r.val_accuracy << '\n';
  return out.str();
}

namespace {

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

}  // namespace

void save_checkpoint(const RecurrentClassifier& model, const std::string& path) {
  BinaryWriter w(path);
  w.header(kModelKind, kModelVersion);
  w.u8(model.cell.kind == CellKind::Lstm ? 0 : 1);
  w.u32(static_cast<uint32_t>(model.cell.input_dim));
  w.u32(static_cast<uint32_t>(model.cell.hidden_dim));
  w.u32(static_cast<uint32_t>(model.max_seq_len));
  for (size_t g = 0; g < model.cell.gate_count(); ++g) {
    write_matrix(w, model.cell.wx[g]);
    write_matrix(w, model.cell.wh[g]);
    w.f64_array(model.cell.b[g]);
  }
  write_matrix(w, model.head.weight);
  w.f64_array(model.head.bias);
  w.u8(model.embedding ? 1 : 0);
  if (model.embedding) {
    w.u8(model.embedding->trainable ? 1 : 0);
    write_matrix(w, model.embedding->matrix);
  }
  w.close();
}

RecurrentClassifier load_checkpoint(const std::string& path) {
  BinaryReader r(path);
  r.header(kModelKind);
  RecurrentClassifier m;
  m.cell.kind = r.u8() == 0 ? CellKind::Lstm : CellKind::Gru;
  m.cell.input_dim = static_cast<int>(r.u32());
  m.cell.hidden_dim = static_cast<int>(r.u32());
  m.max_seq_len = static_cast<int>(r.u32());
  for (size_t g = 0; g < m.cell.gate_count(); ++g) {
    m.cell.wx.push_back(read_matrix(r));
    m.cell.wh.push_back(read_matrix(r));
    m.cell.b.push_back(r.f64_array());
  }
  m.head.weight = read_matrix(r);
  m.head.bias = r.f64_array();
  if (r.u8()) {
    EmbeddingLayer layer;
    layer.trainable = r.u8() != 0;
    layer.matrix = read_matrix(r);
    m.embedding = std::move(layer);
  }
  return m;
}

uint64_t weights_hash(const Matrix& m) {
  return fnv1a64(m.data.data(), m.data.size() * sizeof(double));
}

}  // namespace stylus
