#pragma once

#include <span>
#include <string>
#include <vector>

#include "expander/graph_spectra.hpp"
#include "expander/pruning.hpp"

namespace expander {

struct ReportOptions {
  std::vector<LayerTag> layers{LayerTag::xh, LayerTag::hh};
  std::vector<GraphMode> modes{GraphMode::unweighted, GraphMode::weighted};
  std::string title = "Test accuracy and spectral gap vs remaining edges";
};

/// One panel per (layer, mode): test accuracy on the left axis, the mode's gaps
/// on the right axis, remaining-edge percentage (log scale) on x, and one
/// dashed vertical rule (class "zero-crossing") at the first zero crossing of
/// each plotted gap. Throws DomainError for an empty trajectory.
std::string render_trajectory_svg(std::span<const PruneRecord> records,
                                  const ReportOptions& options = {});

/// Header plus one row per record: round, q_xh, q_hh, accuracy and every gap.
std::string render_trajectory_csv(std::span<const PruneRecord> records);

}  // namespace expander
