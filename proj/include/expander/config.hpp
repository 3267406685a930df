#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "expander/data.hpp"
#include "expander/pruning.hpp"
#include "expander/recurrent.hpp"

namespace expander {

enum class DataSource { synth, idx, csv };
enum class NoiseTarget { both, train, test };

std::string_view to_string(DataSource source);
std::string_view to_string(NoiseTarget target);

/// Everything `prune` and `train` need. Defaults are the Table-1 recipe
/// (lr 0.001, 20 epochs, 20 pruning rounds, batch 100, 128 hidden units).
struct ExperimentConfig {
  CellKind cell = CellKind::rnn;
  std::size_t hidden_size = 128;

  DataSource source = DataSource::synth;
  SynthSpec synth;
  std::string idx_images;
  std::string idx_labels;
  std::size_t idx_limit = 0;
  std::string csv_path;
  double test_fraction = 0.20;

  std::optional<NoiseSpec> noise;
  NoiseTarget noise_target = NoiseTarget::both;

  TrainConfig train;
  PruneSchedule schedule;
  StopPolicy monitor;
  bool per_gate_reports = true;

  std::string output_dir;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&);
};

// Format: "[section]" headers and "key = value" lines; '#' starts a comment.
// Sections and keys:
//   [model]   cell (rnn|lstm), hidden
//   [data]    source (synth|idx|csv), kind, samples, steps, input_size,
//             max_events, seed, idx_images, idx_labels, idx_limit, csv,
//             test_fraction
//   [noise]   enabled, p, sigma, seed, apply_to (both|train|test)
//   [train]   learning_rate, epochs, batch_size, beta1, beta2, epsilon,
//             clip_norm, kaiming_gain, seed
//   [prune]   rounds, start_fraction, final_fraction, finetune_epochs, rewind
//   [monitor] stop_on (comma-separated layer:kind list), per_gate
//   [output]  dir

/// Throws ConfigError whose message lists every violated field, one per line.
ExperimentConfig parse_config(std::string_view text, bool check_paths = false);
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path, bool check_paths = true);

/// Every violated field, empty when the config is valid.
std::vector<std::string> config_violations(const ExperimentConfig& config, bool check_paths);

}  // namespace expander
