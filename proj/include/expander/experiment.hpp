#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>

#include "expander/config.hpp"
#include "expander/data.hpp"
#include "expander/pruning.hpp"

namespace expander {

/// Loads the configured source and applies noise; returns (train, test).
std::pair<SequenceDataset, SequenceDataset> prepare_datasets(const ExperimentConfig& config);

/// Output directory: explicit override, else config.output_dir, else
/// $EXP_HOME/runs, else ./runs.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config,
                                         const std::optional<std::filesystem::path>& override_dir);

struct PruneRunResult {
  PruneTrajectory trajectory;
  std::filesystem::path trajectory_path;
  /// Rounds taken from disk instead of recomputed.
  std::size_t resumed_rounds = 0;
};

// Layout of the output directory:
//   config.snapshot          serialized config the run was started with
//   trajectory.jsonl         one PruneRecord per line
//   checkpoints/round_NNN.rprm
//   summary.txt              zero-crossing table

/// Runs (or resumes) iterative magnitude pruning into out_dir. Rounds already
/// recorded with a checkpoint on disk are skipped. `round_limit` stops after
/// that round, which simulates an interrupted run.
PruneRunResult run_prune_experiment(const ExperimentConfig& config,
                                    const std::filesystem::path& out_dir,
                                    std::optional<std::size_t> round_limit = std::nullopt);

/// Table of first zero crossings per (layer, gap) with the remaining-edge
/// percentage at that round.
std::string zero_crossing_table(const PruneTrajectory& trajectory);

struct TrainRunResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::filesystem::path checkpoint_path;
};

/// Dense training only; writes dense.rprm into out_dir.
TrainRunResult run_train_experiment(const ExperimentConfig& config,
                                    const std::filesystem::path& out_dir);

}  // namespace expander
