#include "expander/weights.hpp"

#include <algorithm>
#include <string>

#include "expander/errors.hpp"

namespace expander {

std::string_view to_string(LayerTag tag) {
  switch (tag) {
    case LayerTag::xh: return "wxh";
    case LayerTag::hh: return "whh";
    case LayerTag::hy: return "why";
  }
  return "?";
}

LayerTag parse_layer_tag(std::string_view text) {
  if (text == "wxh" || text == "xh") return LayerTag::xh;
  if (text == "whh" || text == "hh") return LayerTag::hh;
  if (text == "why" || text == "hy") return LayerTag::hy;
  throw DomainError("unknown layer '" + std::string(text) + "' (expected wxh, whh or why)");
}

LayerMask::LayerMask(std::size_t rows, std::size_t cols, bool keep)
    : rows_(rows), cols_(cols), bits_(rows * cols, keep ? 1 : 0) {}

std::size_t LayerMask::popcount() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

double LayerMask::kept_fraction() const {
  if (bits_.empty()) return 0.0;
  return static_cast<double>(popcount()) / static_cast<double>(bits_.size());
}

bool LayerMask::subset_of(const LayerMask& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) return false;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] != 0 && other.bits_[i] == 0) return false;
  }
  return true;
}

void LayerMask::apply(DenseMatrix& m) const {
  if (!congruent(m)) throw ShapeError("LayerMask::apply: shape mismatch");
  auto data = m.data();
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] == 0) data[i] = 0.0;
  }
}

const LayerMask& PruneMask::layer(LayerTag tag) const {
  switch (tag) {
    case LayerTag::xh: return xh;
    case LayerTag::hh: return hh;
    case LayerTag::hy: return hy;
  }
  return xh;
}

LayerMask& PruneMask::layer(LayerTag tag) {
  return const_cast<LayerMask&>(static_cast<const PruneMask&>(*this).layer(tag));
}

}  // namespace expander
