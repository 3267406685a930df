#include "expander/experiment.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "expander/checkpoint.hpp"
#include "expander/errors.hpp"

namespace expander {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

fs::path checkpoint_path(const fs::path& out_dir, std::size_t round) {
  char name[32];
  std::snprintf(name, sizeof name, "round_%03zu.rprm", round);
  return out_dir / "checkpoints" / name;
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

std::string percent(double q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * q);
  return buf;
}

}  // namespace

std::pair<SequenceDataset, SequenceDataset> prepare_datasets(const ExperimentConfig& config) {
  SequenceDataset all;
  switch (config.source) {
    case DataSource::synth: all = synth_task(config.synth); break;
    case DataSource::idx: all = load_idx_images(config.idx_images, config.idx_labels, config.idx_limit); break;
    case DataSource::csv: all = load_csv_sequences(config.csv_path); break;
  }
  all.validate();
  if (all.size() < 2) throw DomainError("dataset needs at least 2 sequences");
  auto [train, test] = train_test_split(all, config.test_fraction, config.train.seed);
  if (config.noise) {
    NoiseSpec test_noise = *config.noise;
    test_noise.seed = config.noise->seed + 1;
    if (config.noise_target != NoiseTarget::test) train = add_noise(train, *config.noise);
    if (config.noise_target != NoiseTarget::train) test = add_noise(test, test_noise);
  }
  return {std::move(train), std::move(test)};
}

fs::path resolve_output_dir(const ExperimentConfig& config, const std::optional<fs::path>& override_dir) {
  if (override_dir && !override_dir->empty()) return *override_dir;
  if (!config.output_dir.empty()) return config.output_dir;
  if (const char* home = std::getenv("EXP_HOME"); home != nullptr && *home != '\0') {
    return fs::path(home) / "runs";
  }
  return fs::path("runs");
}

PruneRunResult run_prune_experiment(const ExperimentConfig& config, const fs::path& out_dir,
                                    std::optional<std::size_t> round_limit) {
  if (auto v = config_violations(config, true); !v.empty()) {
    std::string msg = "invalid config";
    for (const std::string& s : v) msg += "\n  " + s;
    throw ConfigError(msg);
  }
  make_dirs(out_dir / "checkpoints");
  const std::string snapshot = serialize_config(config);
  const fs::path snapshot_path = out_dir / "config.snapshot";
  const fs::path traj_path = out_dir / "trajectory.jsonl";

  if (fs::exists(snapshot_path)) {
    if (read_text(snapshot_path) != snapshot) {
      throw ConfigError("output directory '" + out_dir.string() +
                        "' holds a run with a different config; choose another --out");
    }
  } else {
    write_text(snapshot_path, snapshot);
  }

  // Keep the longest prefix of recorded rounds 0..j whose last checkpoint
  // exists; anything after it is recomputed.
  ImpOptions options;
  options.cell = config.cell;
  options.hidden_size = config.hidden_size;
  options.stop_policy = config.monitor;
  options.per_gate_reports = config.per_gate_reports;
  options.max_round = round_limit;
  if (fs::exists(traj_path)) {
    std::vector<PruneRecord> on_disk = read_trajectory_jsonl(traj_path);
    std::size_t usable = 0;
    for (std::size_t i = 0; i < on_disk.size() && on_disk[i].round == i; ++i) {
      if (fs::exists(checkpoint_path(out_dir, i))) usable = i + 1;
    }
    on_disk.resize(usable);
    if (usable > 0) {
      options.resume_state = load_checkpoint(checkpoint_path(out_dir, usable - 1));
      options.resume_records = on_disk;
    }
    write_trajectory_jsonl(traj_path, on_disk);
  }

  PruneRunResult result;
  result.resumed_rounds = options.resume_records.size();
  result.trajectory_path = traj_path;
  if (round_limit && result.resumed_rounds > *round_limit) {
    result.trajectory.records = options.resume_records;
  } else {
    options.on_round = [&](const PruneRecord& record, const Checkpoint& state) {
      save_checkpoint(checkpoint_path(out_dir, record.round), state);
      append_record_jsonl(traj_path, record);
    };
    auto [train, test] = prepare_datasets(config);
    result.trajectory = run_imp(config.train, config.schedule, train, test, options);
  }
  result.trajectory.config_snapshot = snapshot;
  result.trajectory.seed = config.train.seed;
  write_text(out_dir / "summary.txt", zero_crossing_table(result.trajectory));
  return result;
}

std::string zero_crossing_table(const PruneTrajectory& trajectory) {
  std::ostringstream out;
  const auto& recs = trajectory.records;
  if (recs.empty()) return "no rounds recorded\n";
  char line[160];
  std::snprintf(line, sizeof line, "dense accuracy (round 0): %.4f\nfinal round %zu: q_xh %s, q_hh %s, accuracy %.4f\n\n",
                recs.front().test_accuracy, recs.back().round, percent(recs.back().q_xh).c_str(),
                percent(recs.back().q_hh).c_str(), recs.back().test_accuracy);
  out << line;
  std::snprintf(line, sizeof line, "%-6s %-14s %-10s %-12s %s\n", "layer", "gap", "crossing",
                "remaining", "accuracy");
  out << line;
  for (const GapKey& key : all_gap_keys()) {
    auto crossing = detect_zero_crossing(trajectory, key.layer, key.kind);
    const char* layer = key.layer == LayerTag::xh ? "W_xh" : "W_hh";
    if (crossing) {
      const PruneRecord& r = recs[*crossing];
      std::snprintf(line, sizeof line, "%-6s %-14s round %-4zu %-12s %.4f\n", layer,
                    std::string(to_string(key.kind)).c_str(), r.round, percent(r.q(key.layer)).c_str(),
                    r.test_accuracy);
    } else {
      std::snprintf(line, sizeof line, "%-6s %-14s %-10s %-12s %s\n", layer,
                    std::string(to_string(key.kind)).c_str(), "none", "-", "-");
    }
    out << line;
  }
  return out.str();
}

TrainRunResult run_train_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  if (auto v = config_violations(config, true); !v.empty()) {
    std::string msg = "invalid config";
    for (const std::string& s : v) msg += "\n  " + s;
    throw ConfigError(msg);
  }
  auto [train, test] = prepare_datasets(config);
  make_dirs(out_dir);
  RecurrentParams params = init_params(train.input_size, config.hidden_size, train.class_count,
                                       config.cell, config.train.seed, config.train.kaiming_gain);
  PruneMask mask = full_mask(params);
  AdamState adam = AdamState::for_params(params);
  // Same stream as round 0 of a pruning run, so both produce the same dense model.
  Rng rng = Rng::derive(config.train.seed, 0);
  for (std::size_t e = 0; e < config.train.train_epochs; ++e) {
    train_epoch(params, mask, adam, train, config.train, rng);
  }
  TrainRunResult result;
  result.train_accuracy = evaluate(params, mask, train);
  result.test_accuracy = evaluate(params, mask, test);
  result.checkpoint_path = out_dir / "dense.rprm";
  save_checkpoint(result.checkpoint_path, Checkpoint{params, mask});
  return result;
}

}  // namespace expander
