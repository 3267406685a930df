#include "expander/pruning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "expander/errors.hpp"

namespace expander {

namespace {

constexpr std::array<GapKey, 6> kGapKeys = {{
    {LayerTag::xh, GapKind::weighted_S},
    {LayerTag::xh, GapKind::unweighted_S},
    {LayerTag::xh, GapKind::unweighted_R},
    {LayerTag::hh, GapKind::weighted_S},
    {LayerTag::hh, GapKind::unweighted_S},
    {LayerTag::hh, GapKind::unweighted_R},
}};

std::vector<double> gap_series(std::span<const PruneRecord> records, const GapKey& key) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const PruneRecord& r : records) {
    out.push_back(r.gap(key).value_or(std::numeric_limits<double>::quiet_NaN()));
  }
  return out;
}

std::vector<std::pair<GapKey, bool>> crossing_flags(std::span<const PruneRecord> records) {
  std::vector<std::pair<GapKey, bool>> out;
  for (const GapKey& key : kGapKeys) {
    out.emplace_back(key, detect_zero_crossing(gap_series(records, key)).has_value());
  }
  return out;
}

DenseMatrix row_block(const DenseMatrix& m, std::size_t first, std::size_t count) {
  DenseMatrix out(count, m.cols());
  for (std::size_t r = 0; r < count; ++r) {
    auto src = m.row(first + r);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

LayerMask mask_rows(const LayerMask& m, std::size_t first, std::size_t count) {
  LayerMask out(count, m.cols(), false);
  for (std::size_t r = 0; r < count; ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out.set(r, c, m(first + r, c));
  }
  return out;
}

void append_reports(std::vector<LayerReport>& out, LayerTag layer, std::optional<std::size_t> gate,
                    const DenseMatrix& w, const LayerMask& mask) {
  for (GraphMode mode : {GraphMode::unweighted, GraphMode::weighted}) {
    BipartiteGraph g = build_bipartite(WeightMatrix{layer, w}, mask, mode);
    // An edgeless layer has no spectrum to report; its gaps read as absent.
    if (g.degenerate()) continue;
    out.push_back(LayerReport{layer, gate, spectral_gaps(g)});
  }
}

// Lottery-ticket style rewind: every parameter returns to its initial value
// and the current mask is re-applied.
void rewind(RecurrentParams& params, const RecurrentParams& initial, const PruneMask& mask) {
  params = initial;
  apply_mask(params, mask);
}

}  // namespace

double PruneSchedule::keep_ratio() const {
  if (rounds == 0) return 1.0;
  return std::pow(final_fraction / start_fraction, 1.0 / static_cast<double>(rounds));
}

double PruneSchedule::fraction_at(std::size_t round) const {
  if (round >= rounds) return final_fraction;
  return start_fraction * std::pow(keep_ratio(), static_cast<double>(round));
}

void PruneSchedule::validate() const {
  std::string bad;
  auto flag = [&](bool ok, const char* what) {
    if (!ok) bad += (bad.empty() ? "" : "; ") + std::string(what);
  };
  flag(rounds >= 1, "rounds must be >= 1");
  flag(start_fraction > 0.0 && start_fraction <= 1.0, "start_fraction must lie in (0, 1]");
  flag(final_fraction > 0.0 && final_fraction <= start_fraction,
       "final_fraction must lie in (0, start_fraction]");
  if (!bad.empty()) throw DomainError("prune schedule: " + bad);
}

std::string_view to_string(GapKind kind) {
  switch (kind) {
    case GapKind::weighted_S: return "weighted_S";
    case GapKind::unweighted_S: return "unweighted_S";
    case GapKind::unweighted_R: return "unweighted_R";
  }
  return "?";
}

GapKind parse_gap_kind(std::string_view text) {
  if (text == "weighted_S") return GapKind::weighted_S;
  if (text == "unweighted_S") return GapKind::unweighted_S;
  if (text == "unweighted_R") return GapKind::unweighted_R;
  throw DomainError("unknown gap kind '" + std::string(text) +
                    "' (expected weighted_S, unweighted_S or unweighted_R)");
}

std::string to_string(const GapKey& key) {
  return std::string(key.layer == LayerTag::xh ? "xh" : key.layer == LayerTag::hh ? "hh" : "hy") +
         ":" + std::string(to_string(key.kind));
}

GapKey parse_gap_key(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw DomainError("gap key '" + std::string(text) + "' must look like layer:kind");
  }
  GapKey key{parse_layer_tag(text.substr(0, colon)), parse_gap_kind(text.substr(colon + 1))};
  if (key.layer == LayerTag::hy) throw DomainError("the output layer is never pruned or monitored");
  return key;
}

std::span<const GapKey> all_gap_keys() { return kGapKeys; }

const SpectralReport* PruneRecord::find(LayerTag layer, GraphMode mode) const {
  for (const LayerReport& r : reports) {
    if (r.layer == layer && !r.gate && r.report.mode == mode) return &r.report;
  }
  return nullptr;
}

std::optional<double> PruneRecord::gap(const GapKey& key) const {
  const GraphMode mode = key.kind == GapKind::weighted_S ? GraphMode::weighted : GraphMode::unweighted;
  const SpectralReport* r = find(key.layer, mode);
  if (r == nullptr) return std::nullopt;
  if (key.kind == GapKind::unweighted_R) return r->delta_R;
  return r->delta_S;
}

LayerMask magnitude_prune(const DenseMatrix& w, const LayerMask& mask, double q) {
  if (!mask.congruent(w)) throw ShapeError("magnitude_prune: mask and weights differ in shape");
  if (!(q > 0.0 && q <= 1.0)) {
    throw DomainError("magnitude_prune: q = " + std::to_string(q) + " outside (0, 1]");
  }
  const std::size_t total = mask.size();
  // The offset absorbs representation error in products that are integers
  // in exact arithmetic.
  const double raw = std::ceil(q * static_cast<double>(total) - 1e-9);
  const std::size_t target = std::max<std::size_t>(1, static_cast<std::size_t>(std::max(raw, 0.0)));
  if (target >= mask.popcount()) return mask;

  std::vector<std::size_t> kept;
  kept.reserve(mask.popcount());
  for (std::size_t i = 0; i < total; ++i) {
    if (mask.at(i)) kept.push_back(i);
  }
  auto data = w.data();
  std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(data[a]) > std::abs(data[b]);
  });
  LayerMask out(mask.rows(), mask.cols(), false);
  for (std::size_t i = 0; i < target; ++i) out.set_flat(kept[i], true);
  return out;
}

std::optional<std::size_t> detect_zero_crossing(std::span<const double> gaps) {
  // Every value before the first negative one is >= 0 (or skipped), so the
  // first negative value is the first transition.
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (std::isnan(gaps[i])) continue;
    if (gaps[i] < 0.0) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> detect_zero_crossing(const PruneTrajectory& trajectory, LayerTag layer,
                                                GapKind kind) {
  if (layer == LayerTag::hy) throw DomainError("detect_zero_crossing: the output layer is not monitored");
  if (trajectory.records.empty()) throw DomainError("detect_zero_crossing: empty trajectory");
  return detect_zero_crossing(gap_series(trajectory.records, GapKey{layer, kind}));
}

StopDecision stop_criterion(const PruneTrajectory& trajectory, const StopPolicy& policy) {
  for (const GapKey& key : policy.monitored) {
    if (detect_zero_crossing(gap_series(trajectory.records, key))) return StopDecision::stop;
  }
  return StopDecision::continue_pruning;
}

std::vector<LayerReport> layer_reports(const RecurrentParams& params, const PruneMask& mask,
                                       bool per_gate) {
  std::vector<LayerReport> out;
  for (LayerTag layer : {LayerTag::xh, LayerTag::hh}) {
    append_reports(out, layer, std::nullopt, params.layer(layer), mask.layer(layer));
  }
  if (per_gate && params.cell == CellKind::lstm) {
    const std::size_t h = params.hidden_size;
    for (LayerTag layer : {LayerTag::xh, LayerTag::hh}) {
      for (std::size_t gate = 0; gate < 4; ++gate) {
        append_reports(out, layer, gate, row_block(params.layer(layer), gate * h, h),
                       mask_rows(mask.layer(layer), gate * h, h));
      }
    }
  }
  return out;
}

PruneTrajectory run_imp(const TrainConfig& config, const PruneSchedule& schedule,
                        const SequenceDataset& train, const SequenceDataset& test,
                        const ImpOptions& options) {
  config.validate();
  schedule.validate();
  if (train.empty() || test.empty()) throw DomainError("run_imp: empty train or test set");
  train.validate();
  test.validate();

  const RecurrentParams initial = init_params(train.input_size, options.hidden_size,
                                              train.class_count, options.cell, config.seed,
                                              config.kaiming_gain);
  PruneTrajectory traj;
  traj.seed = config.seed;
  RecurrentParams params = initial;
  PruneMask mask = full_mask(params);
  std::size_t first_round = 0;

  if (!options.resume_records.empty()) {
    if (!options.resume_state) throw DomainError("run_imp: resume records given without a state");
    traj.records = options.resume_records;
    params = options.resume_state->params;
    mask = options.resume_state->mask;
    params.validate();
    if (params.input_size != train.input_size || params.class_count != train.class_count ||
        params.hidden_size != options.hidden_size || params.cell != options.cell) {
      throw ShapeError("run_imp: resume state does not match the configured model");
    }
    first_round = traj.records.back().round + 1;
    if (stop_criterion(traj, options.stop_policy) == StopDecision::stop) return traj;
  }

  for (std::size_t round = first_round; round <= schedule.rounds; ++round) {
    Rng rng = Rng::derive(config.seed, round);
    if (round == 0) {
      AdamState adam = AdamState::for_params(params);
      for (std::size_t e = 0; e < config.train_epochs; ++e) {
        train_epoch(params, mask, adam, train, config, rng);
      }
    }

    const double q = schedule.fraction_at(round);
    PruneMask next = mask;
    next.xh = magnitude_prune(params.w_xh, mask.xh, q);
    next.hh = magnitude_prune(params.w_hh, mask.hh, q);
    const bool removed = !(next == mask);
    mask = std::move(next);
    if (removed) {
      if (schedule.rewind_to_init) {
        rewind(params, initial, mask);
      } else {
        apply_mask(params, mask);
      }
      AdamState adam = AdamState::for_params(params);
      for (std::size_t e = 0; e < schedule.finetune_epochs; ++e) {
        train_epoch(params, mask, adam, train, config, rng);
      }
    }

    PruneRecord rec;
    rec.round = round;
    rec.q_xh = mask.xh.kept_fraction();
    rec.q_hh = mask.hh.kept_fraction();
    rec.test_accuracy = evaluate(params, mask, test);
    rec.reports = layer_reports(params, mask, options.per_gate_reports);
    traj.records.push_back(rec);
    traj.records.back().zero_crossed = crossing_flags(traj.records);
    if (options.on_round) options.on_round(traj.records.back(), Checkpoint{params, mask});
    if (stop_criterion(traj, options.stop_policy) == StopDecision::stop) break;
    if (options.max_round && round >= *options.max_round) break;
  }
  return traj;
}

PruneTrajectory run_imp(const TrainConfig& config, const PruneSchedule& schedule,
                        const SequenceDataset& dataset, const ImpOptions& options) {
  if (dataset.empty()) throw DomainError("run_imp: empty dataset");
  auto [train, test] = train_test_split(dataset, 0.20, config.seed);
  return run_imp(config, schedule, train, test, options);
}

}  // namespace expander
