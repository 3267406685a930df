#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "expander/data.hpp"
#include "expander/linalg.hpp"
#include "expander/rng.hpp"
#include "expander/weights.hpp"

namespace expander {

enum class CellKind { rnn, lstm };

std::string_view to_string(CellKind kind);
CellKind parse_cell_kind(std::string_view text);

/// Parameters of a single-layer recurrent classifier.
///
/// For LSTM the four gate blocks are stacked row-wise in the order
/// input, forget, cell, output, so w_xh is (4H x input) and w_hh is (4H x H).
/// The same struct carries gradients and Adam moments.
struct RecurrentParams {
  CellKind cell = CellKind::rnn;
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  std::size_t class_count = 0;

  DenseMatrix w_xh;
  DenseMatrix w_hh;
  DenseMatrix w_hy;
  std::vector<double> b_h;
  std::vector<double> b_y;

  std::size_t gate_count() const noexcept { return cell == CellKind::lstm ? 4 : 1; }
  const DenseMatrix& layer(LayerTag tag) const;
  DenseMatrix& layer(LayerTag tag);
  /// Same shapes, all zero.
  RecurrentParams zeros_like() const;
  std::size_t parameter_count() const;
  /// Flattened views over every parameter in the fixed order
  /// w_xh, w_hh, w_hy, b_h, b_y.
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
  /// Throws ShapeError when the shapes disagree with the sizes.
  void validate() const;

  friend bool operator==(const RecurrentParams&, const RecurrentParams&) = default;
};

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t train_epochs = 20;
  std::size_t batch_size = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global-norm gradient clip; <= 0 disables.
  double clip_norm = 5.0;
  double kaiming_gain = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

PruneMask full_mask(const RecurrentParams& params);

/// Uniform(-b, b) weights with b = gain * sqrt(6 / fan_in); zero biases except
/// the LSTM forget gate, which starts at 1.
RecurrentParams init_params(std::size_t input_size, std::size_t hidden_size,
                            std::size_t class_count, CellKind cell, std::uint64_t seed,
                            double kaiming_gain = 1.0);

/// Zeroes masked entries of w_xh, w_hh, w_hy.
void apply_mask(RecurrentParams& params, const PruneMask& mask);

struct ForwardResult {
  std::vector<double> logits;
  /// hidden state after each step (k rows of hidden_size)
  std::vector<std::vector<double>> states;
};

/// h_0 = c_0 = 0. Masked weights contribute nothing. Throws ShapeError.
ForwardResult forward(const RecurrentParams& params, const PruneMask& mask,
                      const DenseMatrix& sequence);

struct Sample {
  const DenseMatrix* sequence;
  std::size_t label;
};

struct LossAndGrads {
  double loss = 0.0;
  RecurrentParams grads;
};

/// Mean softmax cross-entropy over the batch and its exact BPTT gradient.
/// Gradients of masked entries are exactly zero.
LossAndGrads loss_and_grads(const RecurrentParams& params, const PruneMask& mask,
                            std::span<const Sample> batch);

/// Scales grads so that their global L2 norm is at most max_norm. Returns the
/// norm before clipping.
double clip_global_norm(RecurrentParams& grads, double max_norm);

struct AdamState {
  RecurrentParams m;
  RecurrentParams v;
  std::size_t step = 0;

  static AdamState for_params(const RecurrentParams& params);
};

/// Bias-corrected Adam update; masked entries are left at exactly zero.
void adam_step(RecurrentParams& params, const RecurrentParams& grads, AdamState& state,
               const TrainConfig& config, const PruneMask& mask);

/// Argmax accuracy in [0, 1]; ties resolve to the lowest class index.
/// Throws DomainError for an empty dataset.
double evaluate(const RecurrentParams& params, const PruneMask& mask, const SequenceDataset& ds);

/// One pass over `train` in an order shuffled by rng, with batches of
/// config.batch_size (the last one may be short). Returns mean batch loss.
double train_epoch(RecurrentParams& params, const PruneMask& mask, AdamState& adam,
                   const SequenceDataset& train, const TrainConfig& config, Rng& rng);

}  // namespace expander
