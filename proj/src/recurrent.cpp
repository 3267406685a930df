#include "expander/recurrent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "expander/errors.hpp"

namespace expander {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string dims(const DenseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_mask(const RecurrentParams& p, const PruneMask& mask) {
  if (!mask.xh.congruent(p.w_xh) || !mask.hh.congruent(p.w_hh) || !mask.hy.congruent(p.w_hy)) {
    throw ShapeError("mask shapes do not match the parameters");
  }
}

// Weights with the mask applied, so that masked entries contribute exactly 0
// whatever the stored values are.
struct Effective {
  DenseMatrix w_xh;
  DenseMatrix w_hh;
  DenseMatrix w_hy;
};

Effective effective_weights(const RecurrentParams& p, const PruneMask& mask) {
  check_mask(p, mask);
  Effective e{p.w_xh, p.w_hh, p.w_hy};
  mask.xh.apply(e.w_xh);
  mask.hh.apply(e.w_hh);
  mask.hy.apply(e.w_hy);
  return e;
}

// out = b + W x, accumulated left to right.
void affine(const DenseMatrix& w, std::span<const double> x, std::span<double> out) {
  for (std::size_t r = 0; r < w.rows(); ++r) {
    auto row = w.row(r);
    double s = out[r];
    for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * x[c];
    out[r] = s;
  }
}

// out += W^T d
void affine_transpose(const DenseMatrix& w, std::span<const double> d, std::span<double> out) {
  for (std::size_t r = 0; r < w.rows(); ++r) {
    auto row = w.row(r);
    const double dr = d[r];
    if (dr == 0.0) continue;
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * dr;
  }
}

// G += d x^T
void outer_add(DenseMatrix& g, std::span<const double> d, std::span<const double> x) {
  for (std::size_t r = 0; r < g.rows(); ++r) {
    auto row = g.row(r);
    const double dr = d[r];
    if (dr == 0.0) continue;
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += dr * x[c];
  }
}

// Per-sequence activations kept for the backward pass. Row t of `h` and `c`
// is the state after step t (row 0 is the zero initial state); row t of
// `act` holds the activated gate values of step t + 1.
struct Trace {
  std::size_t steps = 0;
  std::size_t hidden = 0;
  std::size_t width = 0;
  std::vector<double> h;
  std::vector<double> c;
  std::vector<double> act;
  std::vector<double> logits;

  std::span<double> h_at(std::size_t t) { return std::span<double>(h).subspan(t * hidden, hidden); }
  std::span<double> c_at(std::size_t t) { return std::span<double>(c).subspan(t * hidden, hidden); }
  std::span<double> act_at(std::size_t t) { return std::span<double>(act).subspan(t * width, width); }
};

void run_forward(const RecurrentParams& p, const Effective& e, const DenseMatrix& x, Trace& tr) {
  if (x.cols() != p.input_size || x.rows() == 0) {
    throw ShapeError("forward: sequence is " + dims(x) + ", expected k x " +
                     std::to_string(p.input_size) + " with k >= 1");
  }
  const std::size_t hdim = p.hidden_size;
  const std::size_t width = p.gate_count() * hdim;
  tr.steps = x.rows();
  tr.hidden = hdim;
  tr.width = width;
  tr.h.assign((tr.steps + 1) * hdim, 0.0);
  tr.c.assign(p.cell == CellKind::lstm ? (tr.steps + 1) * hdim : 0, 0.0);
  tr.act.assign(tr.steps * width, 0.0);

  for (std::size_t t = 0; t < tr.steps; ++t) {
    auto z = tr.act_at(t);
    std::copy(p.b_h.begin(), p.b_h.end(), z.begin());
    affine(e.w_xh, x.row(t), z);
    affine(e.w_hh, tr.h_at(t), z);
    auto h = tr.h_at(t + 1);
    if (p.cell == CellKind::rnn) {
      for (std::size_t j = 0; j < hdim; ++j) {
        z[j] = std::tanh(z[j]);
        h[j] = z[j];
      }
    } else {
      auto c_prev = tr.c_at(t);
      auto c = tr.c_at(t + 1);
      for (std::size_t j = 0; j < hdim; ++j) {
        const double ig = sigmoid(z[j]);
        const double fg = sigmoid(z[hdim + j]);
        const double gg = std::tanh(z[2 * hdim + j]);
        const double og = sigmoid(z[3 * hdim + j]);
        z[j] = ig;
        z[hdim + j] = fg;
        z[2 * hdim + j] = gg;
        z[3 * hdim + j] = og;
        c[j] = fg * c_prev[j] + ig * gg;
        h[j] = og * std::tanh(c[j]);
      }
    }
  }
  tr.logits.assign(p.b_y.begin(), p.b_y.end());
  affine(e.w_hy, tr.h_at(tr.steps), tr.logits);
}

// Softmax cross-entropy; writes dloss/dlogits into `grad`.
double cross_entropy(std::span<const double> logits, std::size_t label, std::span<double> grad) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - top);
  const double log_z = top + std::log(z);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    grad[i] = std::exp(logits[i] - log_z) - (i == label ? 1.0 : 0.0);
  }
  return log_z - logits[label];
}

void run_backward(const RecurrentParams& p, const Effective& e, const DenseMatrix& x, Trace& tr,
                  std::span<const double> dlogits, RecurrentParams& g) {
  const std::size_t hdim = p.hidden_size;
  outer_add(g.w_hy, dlogits, tr.h_at(tr.steps));
  for (std::size_t i = 0; i < dlogits.size(); ++i) g.b_y[i] += dlogits[i];

  std::vector<double> dh(hdim, 0.0);
  affine_transpose(e.w_hy, dlogits, dh);
  std::vector<double> dc(p.cell == CellKind::lstm ? hdim : 0, 0.0);
  std::vector<double> dz(tr.width, 0.0);

  for (std::size_t t = tr.steps; t-- > 0;) {
    auto a = tr.act_at(t);
    if (p.cell == CellKind::rnn) {
      for (std::size_t j = 0; j < hdim; ++j) dz[j] = dh[j] * (1.0 - a[j] * a[j]);
    } else {
      auto c = tr.c_at(t + 1);
      auto c_prev = tr.c_at(t);
      for (std::size_t j = 0; j < hdim; ++j) {
        const double ig = a[j];
        const double fg = a[hdim + j];
        const double gg = a[2 * hdim + j];
        const double og = a[3 * hdim + j];
        const double tc = std::tanh(c[j]);
        const double dcj = dc[j] + dh[j] * og * (1.0 - tc * tc);
        dz[j] = dcj * gg * ig * (1.0 - ig);
        dz[hdim + j] = dcj * c_prev[j] * fg * (1.0 - fg);
        dz[2 * hdim + j] = dcj * ig * (1.0 - gg * gg);
        dz[3 * hdim + j] = dh[j] * tc * og * (1.0 - og);
        dc[j] = dcj * fg;
      }
    }
    outer_add(g.w_xh, dz, x.row(t));
    outer_add(g.w_hh, dz, tr.h_at(t));
    for (std::size_t j = 0; j < tr.width; ++j) g.b_h[j] += dz[j];
    std::fill(dh.begin(), dh.end(), 0.0);
    affine_transpose(e.w_hh, dz, dh);
  }
}

}  // namespace

std::string_view to_string(CellKind kind) { return kind == CellKind::lstm ? "lstm" : "rnn"; }

CellKind parse_cell_kind(std::string_view text) {
  if (text == "rnn") return CellKind::rnn;
  if (text == "lstm") return CellKind::lstm;
  throw DomainError("unknown cell kind '" + std::string(text) + "' (expected rnn or lstm)");
}

const DenseMatrix& RecurrentParams::layer(LayerTag tag) const {
  switch (tag) {
    case LayerTag::xh: return w_xh;
    case LayerTag::hh: return w_hh;
    case LayerTag::hy: return w_hy;
  }
  return w_xh;
}

DenseMatrix& RecurrentParams::layer(LayerTag tag) {
  return const_cast<DenseMatrix&>(static_cast<const RecurrentParams&>(*this).layer(tag));
}

RecurrentParams RecurrentParams::zeros_like() const {
  RecurrentParams z;
  z.cell = cell;
  z.input_size = input_size;
  z.hidden_size = hidden_size;
  z.class_count = class_count;
  z.w_xh = DenseMatrix(w_xh.rows(), w_xh.cols());
  z.w_hh = DenseMatrix(w_hh.rows(), w_hh.cols());
  z.w_hy = DenseMatrix(w_hy.rows(), w_hy.cols());
  z.b_h.assign(b_h.size(), 0.0);
  z.b_y.assign(b_y.size(), 0.0);
  return z;
}

std::size_t RecurrentParams::parameter_count() const {
  return w_xh.size() + w_hh.size() + w_hy.size() + b_h.size() + b_y.size();
}

std::vector<std::span<double>> RecurrentParams::blocks() {
  return {w_xh.data(), w_hh.data(), w_hy.data(), b_h, b_y};
}

std::vector<std::span<const double>> RecurrentParams::blocks() const {
  return {w_xh.data(), w_hh.data(), w_hy.data(), b_h, b_y};
}

void RecurrentParams::validate() const {
  const std::size_t width = gate_count() * hidden_size;
  auto expect = [](const DenseMatrix& m, std::size_t r, std::size_t c, const char* name) {
    if (m.rows() != r || m.cols() != c) {
      throw ShapeError(std::string(name) + " is " + dims(m) + ", expected " + std::to_string(r) +
                       "x" + std::to_string(c));
    }
  };
  if (input_size == 0 || hidden_size == 0 || class_count == 0) {
    throw ShapeError("recurrent params: sizes must be at least 1");
  }
  expect(w_xh, width, input_size, "w_xh");
  expect(w_hh, width, hidden_size, "w_hh");
  expect(w_hy, class_count, hidden_size, "w_hy");
  if (b_h.size() != width) throw ShapeError("b_h has wrong length");
  if (b_y.size() != class_count) throw ShapeError("b_y has wrong length");
}

void TrainConfig::validate() const {
  std::string bad;
  auto flag = [&](bool ok, const char* what) {
    if (!ok) bad += (bad.empty() ? "" : "; ") + std::string(what);
  };
  flag(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be > 0");
  flag(train_epochs >= 1, "train_epochs must be >= 1");
  flag(batch_size >= 1, "batch_size must be >= 1");
  flag(beta1 >= 0.0 && beta1 < 1.0, "beta1 must lie in [0, 1)");
  flag(beta2 >= 0.0 && beta2 < 1.0, "beta2 must lie in [0, 1)");
  flag(epsilon > 0.0, "epsilon must be > 0");
  flag(kaiming_gain > 0.0 && std::isfinite(kaiming_gain), "kaiming_gain must be > 0");
  flag(std::isfinite(clip_norm), "clip_norm must be finite");
  if (!bad.empty()) throw DomainError("train config: " + bad);
}

PruneMask full_mask(const RecurrentParams& params) {
  return PruneMask{LayerMask::full(params.w_xh.rows(), params.w_xh.cols()),
                   LayerMask::full(params.w_hh.rows(), params.w_hh.cols()),
                   LayerMask::full(params.w_hy.rows(), params.w_hy.cols())};
}

RecurrentParams init_params(std::size_t input_size, std::size_t hidden_size,
                            std::size_t class_count, CellKind cell, std::uint64_t seed,
                            double kaiming_gain) {
  if (input_size == 0 || hidden_size == 0 || class_count == 0) {
    throw DomainError("init_params: sizes must be at least 1");
  }
  RecurrentParams p;
  p.cell = cell;
  p.input_size = input_size;
  p.hidden_size = hidden_size;
  p.class_count = class_count;
  const std::size_t width = p.gate_count() * hidden_size;
  p.w_xh = DenseMatrix(width, input_size);
  p.w_hh = DenseMatrix(width, hidden_size);
  p.w_hy = DenseMatrix(class_count, hidden_size);
  p.b_h.assign(width, 0.0);
  p.b_y.assign(class_count, 0.0);

  Rng rng(seed);
  auto fill = [&](DenseMatrix& m) {
    const double bound = kaiming_gain * std::sqrt(6.0 / static_cast<double>(m.cols()));
    for (double& w : m.data()) w = rng.uniform(-bound, bound);
  };
  fill(p.w_xh);
  fill(p.w_hh);
  fill(p.w_hy);
  if (cell == CellKind::lstm) {
    std::fill(p.b_h.begin() + static_cast<std::ptrdiff_t>(hidden_size),
              p.b_h.begin() + static_cast<std::ptrdiff_t>(2 * hidden_size), 1.0);
  }
  return p;
}

void apply_mask(RecurrentParams& params, const PruneMask& mask) {
  check_mask(params, mask);
  mask.xh.apply(params.w_xh);
  mask.hh.apply(params.w_hh);
  mask.hy.apply(params.w_hy);
}

ForwardResult forward(const RecurrentParams& params, const PruneMask& mask,
                      const DenseMatrix& sequence) {
  params.validate();
  Effective e = effective_weights(params, mask);
  Trace tr;
  run_forward(params, e, sequence, tr);
  ForwardResult out;
  out.logits = tr.logits;
  out.states.reserve(tr.steps);
  for (std::size_t t = 1; t <= tr.steps; ++t) {
    auto h = tr.h_at(t);
    out.states.emplace_back(h.begin(), h.end());
  }
  return out;
}

LossAndGrads loss_and_grads(const RecurrentParams& params, const PruneMask& mask,
                            std::span<const Sample> batch) {
  if (batch.empty()) throw DomainError("loss_and_grads: empty batch");
  params.validate();
  Effective e = effective_weights(params, mask);
  LossAndGrads out;
  out.grads = params.zeros_like();
  Trace tr;
  std::vector<double> dlogits(params.class_count);
  for (const Sample& s : batch) {
    if (s.label >= params.class_count) throw DomainError("loss_and_grads: label out of range");
    run_forward(params, e, *s.sequence, tr);
    out.loss += cross_entropy(tr.logits, s.label, dlogits);
    run_backward(params, e, *s.sequence, tr, dlogits, out.grads);
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  out.loss *= scale;
  for (auto block : out.grads.blocks()) {
    for (double& x : block) x *= scale;
  }
  apply_mask(out.grads, mask);
  return out;
}

double clip_global_norm(RecurrentParams& grads, double max_norm) {
  double sq = 0.0;
  for (auto block : grads.blocks()) {
    for (double x : block) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto block : grads.blocks()) {
      for (double& x : block) x *= scale;
    }
  }
  return norm;
}

AdamState AdamState::for_params(const RecurrentParams& params) {
  return AdamState{params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(RecurrentParams& params, const RecurrentParams& grads, AdamState& state,
               const TrainConfig& config, const PruneMask& mask) {
  if (params.parameter_count() != grads.parameter_count() ||
      params.parameter_count() != state.m.parameter_count() ||
      params.parameter_count() != state.v.parameter_count()) {
    throw ShapeError("adam_step: state shapes do not match the parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  auto p = params.blocks();
  auto g = grads.blocks();
  auto m = state.m.blocks();
  auto v = state.v.blocks();
  for (std::size_t b = 0; b < p.size(); ++b) {
    for (std::size_t i = 0; i < p[b].size(); ++i) {
      const double gi = g[b][i];
      m[b][i] = config.beta1 * m[b][i] + (1.0 - config.beta1) * gi;
      v[b][i] = config.beta2 * v[b][i] + (1.0 - config.beta2) * gi * gi;
      const double m_hat = m[b][i] / c1;
      const double v_hat = v[b][i] / c2;
      p[b][i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
  apply_mask(params, mask);
}

double evaluate(const RecurrentParams& params, const PruneMask& mask, const SequenceDataset& ds) {
  if (ds.empty()) throw DomainError("evaluate: empty dataset");
  params.validate();
  Effective e = effective_weights(params, mask);
  Trace tr;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    run_forward(params, e, ds.sequences[i], tr);
    const auto best = std::max_element(tr.logits.begin(), tr.logits.end());
    if (static_cast<std::size_t>(best - tr.logits.begin()) == ds.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

double train_epoch(RecurrentParams& params, const PruneMask& mask, AdamState& adam,
                   const SequenceDataset& train, const TrainConfig& config, Rng& rng) {
  if (train.empty()) throw DomainError("train_epoch: empty training set");
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<Sample> batch;
  double loss_sum = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    const std::size_t end = std::min(order.size(), start + config.batch_size);
    batch.clear();
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(Sample{&train.sequences[order[i]], train.labels[order[i]]});
    }
    LossAndGrads lg = loss_and_grads(params, mask, batch);
    clip_global_norm(lg.grads, config.clip_norm);
    adam_step(params, lg.grads, adam, config, mask);
    loss_sum += lg.loss;
    ++batches;
  }
  return loss_sum / static_cast<double>(batches);
}

}  // namespace expander
