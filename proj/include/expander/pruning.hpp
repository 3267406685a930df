#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expander/checkpoint.hpp"
#include "expander/data.hpp"
#include "expander/graph_spectra.hpp"
#include "expander/recurrent.hpp"
#include "expander/weights.hpp"

namespace expander {

/// Geometric sparsity schedule: round t keeps q0 * r^t of each pruned layer,
/// r = (qT / q0)^(1 / rounds).
struct PruneSchedule {
  std::size_t rounds = 20;
  double start_fraction = 1.0;
  double final_fraction = 0.01;
  std::size_t finetune_epochs = 2;
  /// Reset surviving weights to their initial values before fine-tuning.
  bool rewind_to_init = false;

  double keep_ratio() const;
  double fraction_at(std::size_t round) const;
  void validate() const;
};

enum class GapKind { weighted_S, unweighted_S, unweighted_R };

std::string_view to_string(GapKind kind);
GapKind parse_gap_kind(std::string_view text);

struct GapKey {
  LayerTag layer = LayerTag::hh;
  GapKind kind = GapKind::weighted_S;

  friend bool operator==(const GapKey&, const GapKey&) = default;
};

/// "hh:weighted_S" style text form.
std::string to_string(const GapKey& key);
GapKey parse_gap_key(std::string_view text);

/// The six (layer, kind) pairs monitored on every round.
std::span<const GapKey> all_gap_keys();

struct LayerReport {
  LayerTag layer = LayerTag::xh;
  /// Set for per-gate LSTM reports; empty for the stacked matrix.
  std::optional<std::size_t> gate;
  SpectralReport report;
};

struct PruneRecord {
  std::size_t round = 0;
  double q_xh = 1.0;
  double q_hh = 1.0;
  double test_accuracy = 0.0;
  std::vector<LayerReport> reports;
  /// For every key in all_gap_keys(): whether the first zero crossing has
  /// happened at or before this round.
  std::vector<std::pair<GapKey, bool>> zero_crossed;

  double q(LayerTag layer) const { return layer == LayerTag::xh ? q_xh : q_hh; }
  /// Stacked-matrix report, or nullptr.
  const SpectralReport* find(LayerTag layer, GraphMode mode) const;
  /// Value of the gap, or empty when the report/kind is absent.
  std::optional<double> gap(const GapKey& key) const;
};

struct PruneTrajectory {
  std::vector<PruneRecord> records;
  std::string config_snapshot;
  std::uint64_t seed = 0;
};

/// Keeps the ceil(q * size) largest-|w| entries among those still kept;
/// ties go to the earlier (row, col). Never regrows: if the target exceeds the
/// current support the mask is returned unchanged. Throws DomainError for
/// q <= 0 or q > 1 and ShapeError for mismatched shapes.
LayerMask magnitude_prune(const DenseMatrix& w, const LayerMask& mask, double q);

/// Index of the first transition from >= 0 to < 0. A negative first value
/// counts as a crossing at index 0. NaN entries are skipped.
std::optional<std::size_t> detect_zero_crossing(std::span<const double> gaps);

/// Throws DomainError for LayerTag::hy or an empty trajectory.
std::optional<std::size_t> detect_zero_crossing(const PruneTrajectory& trajectory, LayerTag layer,
                                                GapKind kind);

enum class StopDecision { continue_pruning, stop };

struct StopPolicy {
  std::vector<GapKey> monitored;
};

/// Stop once any monitored gap has crossed zero; an empty policy never stops.
StopDecision stop_criterion(const PruneTrajectory& trajectory, const StopPolicy& policy);

/// Spectral reports for xh and hh in both modes, plus per-gate LSTM reports
/// when requested.
std::vector<LayerReport> layer_reports(const RecurrentParams& params, const PruneMask& mask,
                                       bool per_gate);

struct ImpOptions {
  CellKind cell = CellKind::rnn;
  std::size_t hidden_size = 128;
  StopPolicy stop_policy;
  bool per_gate_reports = true;
  /// Called after every completed round with the record and the model state.
  std::function<void(const PruneRecord&, const Checkpoint&)> on_round;
  /// Continue after the last record of `resume_records`, starting from
  /// `resume_state`, which must be the state saved for that round.
  std::vector<PruneRecord> resume_records;
  std::optional<Checkpoint> resume_state;
  /// Stop after this round even if the schedule continues.
  std::optional<std::size_t> max_round;
};

/// Round 0 trains the dense model for config.train_epochs; every round t
/// then prunes w_xh and w_hh to schedule.fraction_at(t), fine-tunes for
/// schedule.finetune_epochs (skipped when no weight was removed), evaluates
/// and records spectral reports. Each round draws from its own RNG stream so
/// a resumed run reproduces an uninterrupted one.
PruneTrajectory run_imp(const TrainConfig& config, const PruneSchedule& schedule,
                        const SequenceDataset& train, const SequenceDataset& test,
                        const ImpOptions& options);

/// Splits 80/20 with config.seed and calls the overload above.
PruneTrajectory run_imp(const TrainConfig& config, const PruneSchedule& schedule,
                        const SequenceDataset& dataset, const ImpOptions& options);

/// One JSON object per record; non-finite gaps are written as the strings
/// "inf", "-inf", "nan".
std::string record_to_json(const PruneRecord& record);
PruneRecord record_from_json(std::string_view line);

void write_trajectory_jsonl(const std::filesystem::path& path,
                            std::span<const PruneRecord> records);
void append_record_jsonl(const std::filesystem::path& path, const PruneRecord& record);
std::vector<PruneRecord> read_trajectory_jsonl(const std::filesystem::path& path);

}  // namespace expander
