#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <utility>
#include <vector>

#include "expander/linalg.hpp"

namespace expander {

/// Fixed-length sequence classification set. Each sequence is a k x input_size
/// matrix whose row t is the input vector at time step t.
struct SequenceDataset {
  std::vector<DenseMatrix> sequences;
  std::vector<std::size_t> labels;
  std::size_t steps = 0;
  std::size_t input_size = 0;
  std::size_t class_count = 0;

  std::size_t size() const noexcept { return sequences.size(); }
  bool empty() const noexcept { return sequences.empty(); }
  /// Throws ShapeError / DomainError on any broken invariant.
  void validate() const;
  SequenceDataset subset(std::span<const std::size_t> indices) const;
};

/// Gaussian perturbation of a fraction of sequence points.
struct NoiseSpec {
  double fraction = 0.20;
  /// Standard deviation of the additive noise.
  double sigma = 0.15;
  std::uint64_t seed = 0;
};

/// Reads an IDX3 image file (magic 0x00000803) and IDX1 label file (magic
/// 0x00000801). Image row i becomes time step i; pixels are scaled by 1/255.
/// limit > 0 keeps only the first `limit` samples.
SequenceDataset load_idx_images(const std::filesystem::path& images_path,
                                const std::filesystem::path& labels_path,
                                std::size_t limit = 0);

/// Copy of ds where exactly ceil(fraction * k * input_size) distinct positions
/// per sequence receive sigma * N(0, 1). Values are not clamped.
SequenceDataset add_noise(const SequenceDataset& ds, const NoiseSpec& spec);

enum class SynthKind { running_parity, mean_threshold };

std::string_view to_string(SynthKind kind);
SynthKind parse_synth_kind(std::string_view text);

struct SynthSpec {
  SynthKind kind = SynthKind::running_parity;
  std::size_t samples = 1000;
  std::size_t steps = 16;
  std::size_t input_size = 4;
  /// running-parity only: the number of event steps (first feature 1.0) is
  /// drawn uniformly among the counts in [0, max_events] of the target parity.
  std::size_t max_events = 3;
  std::uint64_t seed = 0;
};

/// Label rule of each synthetic task, applied to one sequence.
std::size_t synth_label(SynthKind kind, const DenseMatrix& sequence);

/// Two-class synthetic task with exactly balanced labels (sample i has label
/// i mod 2 before shuffling by the split).
SequenceDataset synth_task(const SynthSpec& spec);

/// Deterministic shuffled partition; the test part has round(n * fraction)
/// samples, clamped so that both parts are non-empty when n >= 2.
std::pair<SequenceDataset, SequenceDataset> train_test_split(const SequenceDataset& ds,
                                                             double test_fraction,
                                                             std::uint64_t seed);

/// Index form of train_test_split: (train indices, test indices).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double test_fraction, std::uint64_t seed);

/// CSV layout: first line "k,input_size,class_count"; then one line per
/// sequence: label followed by k * input_size row-major values.
SequenceDataset load_csv_sequences(const std::filesystem::path& path);
void write_csv_sequences(const SequenceDataset& ds, const std::filesystem::path& path);

/// Writers used by tests and tooling to produce IDX fixtures.
void write_idx_images(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                      const std::vector<std::vector<std::uint8_t>>& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

}  // namespace expander
