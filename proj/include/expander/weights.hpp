#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "expander/linalg.hpp"

namespace expander {

enum class LayerTag { xh, hh, hy };

std::string_view to_string(LayerTag tag);
/// Accepts "wxh"/"xh", "whh"/"hh", "why"/"hy".
LayerTag parse_layer_tag(std::string_view text);

struct WeightMatrix {
  LayerTag tag = LayerTag::xh;
  DenseMatrix values;
};

/// Boolean keep-mask congruent to one weight matrix; false = pruned.
class LayerMask {
 public:
  LayerMask() = default;
  LayerMask(std::size_t rows, std::size_t cols, bool keep);

  static LayerMask full(std::size_t rows, std::size_t cols) { return LayerMask(rows, cols, true); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool operator()(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
  bool at(std::size_t flat) const { return bits_[flat] != 0; }
  void set(std::size_t r, std::size_t c, bool keep) { bits_[r * cols_ + c] = keep ? 1 : 0; }
  void set_flat(std::size_t flat, bool keep) { bits_[flat] = keep ? 1 : 0; }

  std::size_t popcount() const;
  /// popcount / size; 0 for an empty mask.
  double kept_fraction() const;
  bool all_kept() const { return popcount() == size(); }
  bool subset_of(const LayerMask& other) const;
  bool congruent(const DenseMatrix& m) const { return m.rows() == rows_ && m.cols() == cols_; }

  /// Zeroes every entry of m whose mask bit is false.
  void apply(DenseMatrix& m) const;

  friend bool operator==(const LayerMask&, const LayerMask&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Masks for the three layers of a recurrent model. The hy mask is carried for
/// format symmetry and is never pruned.
struct PruneMask {
  LayerMask xh;
  LayerMask hh;
  LayerMask hy;

  const LayerMask& layer(LayerTag tag) const;
  LayerMask& layer(LayerTag tag);

  friend bool operator==(const PruneMask&, const PruneMask&) = default;
};

}  // namespace expander
