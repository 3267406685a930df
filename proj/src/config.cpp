#include "expander/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "expander/errors.hpp"
#include "expander/matrix_io.hpp"

namespace expander {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_value(std::string_view text, T& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return !text.empty() && ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_bool(std::string_view text, bool& out) {
  if (text == "true" || text == "yes" || text == "1") {
    out = true;
    return true;
  }
  if (text == "false" || text == "no" || text == "0") {
    out = false;
    return true;
  }
  return false;
}

// Assigns one key of the config; returns an error message or "" on success.
class Assigner {
 public:
  Assigner(ExperimentConfig& c, NoiseSpec& noise, bool& noise_on)
      : c_(c), noise_(noise), noise_on_(noise_on) {}

  std::string assign(const std::string& section, const std::string& key, std::string_view v) {
    const std::string id = section + "." + key;
    auto number = [&](auto& field) -> std::string {
      return parse_value(v, field) ? "" : "expected a number, got '" + std::string(v) + "'";
    };
    auto flag = [&](bool& field) -> std::string {
      return parse_bool(v, field) ? "" : "expected true or false, got '" + std::string(v) + "'";
    };
    try {
      if (id == "model.cell") c_.cell = parse_cell_kind(v);
      else if (id == "model.hidden") return number(c_.hidden_size);
      else if (id == "data.source") c_.source = parse_source(v);
      else if (id == "data.kind") c_.synth.kind = parse_synth_kind(v);
      else if (id == "data.samples") return number(c_.synth.samples);
      else if (id == "data.steps") return number(c_.synth.steps);
      else if (id == "data.input_size") return number(c_.synth.input_size);
      else if (id == "data.max_events") return number(c_.synth.max_events);
      else if (id == "data.seed") return number(c_.synth.seed);
      else if (id == "data.idx_images") c_.idx_images = std::string(v);
      else if (id == "data.idx_labels") c_.idx_labels = std::string(v);
      else if (id == "data.idx_limit") return number(c_.idx_limit);
      else if (id == "data.csv") c_.csv_path = std::string(v);
      else if (id == "data.test_fraction") return number(c_.test_fraction);
      else if (id == "noise.enabled") return flag(noise_on_);
      else if (id == "noise.p") return number(noise_.fraction);
      else if (id == "noise.sigma") return number(noise_.sigma);
      else if (id == "noise.seed") return number(noise_.seed);
      else if (id == "noise.apply_to") c_.noise_target = parse_target(v);
      else if (id == "train.learning_rate") return number(c_.train.learning_rate);
      else if (id == "train.epochs") return number(c_.train.train_epochs);
      else if (id == "train.batch_size") return number(c_.train.batch_size);
      else if (id == "train.beta1") return number(c_.train.beta1);
      else if (id == "train.beta2") return number(c_.train.beta2);
      else if (id == "train.epsilon") return number(c_.train.epsilon);
      else if (id == "train.clip_norm") return number(c_.train.clip_norm);
      else if (id == "train.kaiming_gain") return number(c_.train.kaiming_gain);
      else if (id == "train.seed") return number(c_.train.seed);
      else if (id == "prune.rounds") return number(c_.schedule.rounds);
      else if (id == "prune.start_fraction") return number(c_.schedule.start_fraction);
      else if (id == "prune.final_fraction") return number(c_.schedule.final_fraction);
      else if (id == "prune.finetune_epochs") return number(c_.schedule.finetune_epochs);
      else if (id == "prune.rewind") return flag(c_.schedule.rewind_to_init);
      else if (id == "monitor.stop_on") c_.monitor.monitored = parse_keys(v);
      else if (id == "monitor.per_gate") return flag(c_.per_gate_reports);
      else if (id == "output.dir") c_.output_dir = std::string(v);
      else return "unknown key";
    } catch (const Error& e) {
      return e.what();
    }
    return "";
  }

 private:
  static DataSource parse_source(std::string_view v) {
    if (v == "synth") return DataSource::synth;
    if (v == "idx") return DataSource::idx;
    if (v == "csv") return DataSource::csv;
    throw ConfigError("expected synth, idx or csv, got '" + std::string(v) + "'");
  }

  static NoiseTarget parse_target(std::string_view v) {
    if (v == "both") return NoiseTarget::both;
    if (v == "train") return NoiseTarget::train;
    if (v == "test") return NoiseTarget::test;
    throw ConfigError("expected both, train or test, got '" + std::string(v) + "'");
  }

  static std::vector<GapKey> parse_keys(std::string_view v) {
    std::vector<GapKey> out;
    while (!v.empty()) {
      const auto comma = v.find(',');
      std::string_view item = trim(v.substr(0, comma));
      if (!item.empty()) out.push_back(parse_gap_key(item));
      if (comma == std::string_view::npos) break;
      v.remove_prefix(comma + 1);
    }
    return out;
  }

  ExperimentConfig& c_;
  NoiseSpec& noise_;
  bool& noise_on_;
};

bool same_synth(const SynthSpec& a, const SynthSpec& b) {
  return a.kind == b.kind && a.samples == b.samples && a.steps == b.steps &&
         a.input_size == b.input_size && a.max_events == b.max_events && a.seed == b.seed;
}

bool same_train(const TrainConfig& a, const TrainConfig& b) {
  return a.learning_rate == b.learning_rate && a.train_epochs == b.train_epochs &&
         a.batch_size == b.batch_size && a.beta1 == b.beta1 && a.beta2 == b.beta2 &&
         a.epsilon == b.epsilon && a.clip_norm == b.clip_norm &&
         a.kaiming_gain == b.kaiming_gain && a.seed == b.seed;
}

bool same_schedule(const PruneSchedule& a, const PruneSchedule& b) {
  return a.rounds == b.rounds && a.start_fraction == b.start_fraction &&
         a.final_fraction == b.final_fraction && a.finetune_epochs == b.finetune_epochs &&
         a.rewind_to_init == b.rewind_to_init;
}

bool same_noise(const std::optional<NoiseSpec>& a, const std::optional<NoiseSpec>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->fraction == b->fraction && a->sigma == b->sigma && a->seed == b->seed;
}

}  // namespace

std::string_view to_string(DataSource source) {
  switch (source) {
    case DataSource::synth: return "synth";
    case DataSource::idx: return "idx";
    case DataSource::csv: return "csv";
  }
  return "?";
}

std::string_view to_string(NoiseTarget target) {
  switch (target) {
    case NoiseTarget::both: return "both";
    case NoiseTarget::train: return "train";
    case NoiseTarget::test: return "test";
  }
  return "?";
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.cell == b.cell && a.hidden_size == b.hidden_size && a.source == b.source &&
         same_synth(a.synth, b.synth) && a.idx_images == b.idx_images &&
         a.idx_labels == b.idx_labels && a.idx_limit == b.idx_limit &&
         a.csv_path == b.csv_path && a.test_fraction == b.test_fraction &&
         same_noise(a.noise, b.noise) && a.noise_target == b.noise_target &&
         same_train(a.train, b.train) && same_schedule(a.schedule, b.schedule) &&
         a.monitor.monitored == b.monitor.monitored &&
         a.per_gate_reports == b.per_gate_reports && a.output_dir == b.output_dir;
}

std::vector<std::string> config_violations(const ExperimentConfig& c, bool check_paths) {
  std::vector<std::string> out;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) out.push_back(msg);
  };
  auto exists = [](const std::string& p) {
    std::error_code ec;
    return std::filesystem::exists(p, ec);
  };
  need(c.hidden_size >= 1, "model.hidden: must be >= 1");
  switch (c.source) {
    case DataSource::synth:
      need(c.synth.samples >= 2, "data.samples: must be >= 2");
      need(c.synth.steps >= 1, "data.steps: must be >= 1");
      need(c.synth.input_size >= 1, "data.input_size: must be >= 1");
      if (c.synth.kind == SynthKind::running_parity) {
        need(c.synth.max_events >= 1 && c.synth.max_events <= c.synth.steps,
             "data.max_events: must lie in [1, steps]");
      }
      break;
    case DataSource::idx:
      need(!c.idx_images.empty(), "data.idx_images: required for source = idx");
      need(!c.idx_labels.empty(), "data.idx_labels: required for source = idx");
      if (check_paths) {
        need(c.idx_images.empty() || exists(c.idx_images),
             "data.idx_images: file '" + c.idx_images + "' does not exist");
        need(c.idx_labels.empty() || exists(c.idx_labels),
             "data.idx_labels: file '" + c.idx_labels + "' does not exist");
      }
      break;
    case DataSource::csv:
      need(!c.csv_path.empty(), "data.csv: required for source = csv");
      if (check_paths) {
        need(c.csv_path.empty() || exists(c.csv_path),
             "data.csv: file '" + c.csv_path + "' does not exist");
      }
      break;
  }
  need(c.test_fraction > 0.0 && c.test_fraction < 1.0, "data.test_fraction: must lie in (0, 1)");
  if (c.noise) {
    need(c.noise->fraction >= 0.0 && c.noise->fraction <= 1.0, "noise.p: must lie in [0, 1]");
    need(c.noise->sigma >= 0.0 && std::isfinite(c.noise->sigma), "noise.sigma: must be >= 0");
  }
  const TrainConfig& t = c.train;
  need(t.learning_rate > 0.0 && std::isfinite(t.learning_rate), "train.learning_rate: must be > 0");
  need(t.train_epochs >= 1, "train.epochs: must be >= 1");
  need(t.batch_size >= 1, "train.batch_size: must be >= 1");
  need(t.beta1 >= 0.0 && t.beta1 < 1.0, "train.beta1: must lie in [0, 1)");
  need(t.beta2 >= 0.0 && t.beta2 < 1.0, "train.beta2: must lie in [0, 1)");
  need(t.epsilon > 0.0, "train.epsilon: must be > 0");
  need(std::isfinite(t.clip_norm), "train.clip_norm: must be finite");
  need(t.kaiming_gain > 0.0 && std::isfinite(t.kaiming_gain), "train.kaiming_gain: must be > 0");
  const PruneSchedule& s = c.schedule;
  need(s.rounds >= 1, "prune.rounds: must be >= 1");
  need(s.start_fraction > 0.0 && s.start_fraction <= 1.0, "prune.start_fraction: must lie in (0, 1]");
  need(s.final_fraction > 0.0 && s.final_fraction <= s.start_fraction,
       "prune.final_fraction: must lie in (0, start_fraction]");
  return out;
}

ExperimentConfig parse_config(std::string_view text, bool check_paths) {
  ExperimentConfig c;
  NoiseSpec noise;
  bool noise_on = false;
  Assigner assigner(c, noise, noise_on);
  std::vector<std::string> errors;
  std::string section;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "malformed section header");
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where + "expected 'key = value'");
      continue;
    }
    if (section.empty()) {
      errors.push_back(where + "key outside any section");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string id = section + "." + key;
    if (auto it = seen.find(id); it != seen.end()) {
      errors.push_back(where + id + ": duplicate (first set on line " + std::to_string(it->second) + ")");
      continue;
    }
    seen[id] = line_no;
    if (std::string msg = assigner.assign(section, key, trim(line.substr(eq + 1))); !msg.empty()) {
      errors.push_back(where + id + ": " + msg);
    }
  }
  if (noise_on) c.noise = noise;
  for (std::string& v : config_violations(c, check_paths)) errors.push_back(std::move(v));
  if (!errors.empty()) {
    std::string msg = "invalid config (" + std::to_string(errors.size()) + " problem" +
                      (errors.size() == 1 ? "" : "s") + ")";
    for (const std::string& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto num = [](double x) { return format_double(x); };
  auto flag = [](bool b) { return b ? "true" : "false"; };
  out << "[model]\n"
      << "cell = " << to_string(c.cell) << "\n"
      << "hidden = " << c.hidden_size << "\n\n";
  out << "[data]\n"
      << "source = " << to_string(c.source) << "\n"
      << "kind = " << to_string(c.synth.kind) << "\n"
      << "samples = " << c.synth.samples << "\n"
      << "steps = " << c.synth.steps << "\n"
      << "input_size = " << c.synth.input_size << "\n"
      << "max_events = " << c.synth.max_events << "\n"
      << "seed = " << c.synth.seed << "\n"
      << "idx_images = " << c.idx_images << "\n"
      << "idx_labels = " << c.idx_labels << "\n"
      << "idx_limit = " << c.idx_limit << "\n"
      << "csv = " << c.csv_path << "\n"
      << "test_fraction = " << num(c.test_fraction) << "\n\n";
  out << "[noise]\n" << "enabled = " << flag(c.noise.has_value()) << "\n";
  if (c.noise) {
    out << "p = " << num(c.noise->fraction) << "\n"
        << "sigma = " << num(c.noise->sigma) << "\n"
        << "seed = " << c.noise->seed << "\n";
  }
  out << "apply_to = " << to_string(c.noise_target) << "\n\n";
  out << "[train]\n"
      << "learning_rate = " << num(c.train.learning_rate) << "\n"
      << "epochs = " << c.train.train_epochs << "\n"
      << "batch_size = " << c.train.batch_size << "\n"
      << "beta1 = " << num(c.train.beta1) << "\n"
      << "beta2 = " << num(c.train.beta2) << "\n"
      << "epsilon = " << num(c.train.epsilon) << "\n"
      << "clip_norm = " << num(c.train.clip_norm) << "\n"
      << "kaiming_gain = " << num(c.train.kaiming_gain) << "\n"
      << "seed = " << c.train.seed << "\n\n";
  out << "[prune]\n"
      << "rounds = " << c.schedule.rounds << "\n"
      << "start_fraction = " << num(c.schedule.start_fraction) << "\n"
      << "final_fraction = " << num(c.schedule.final_fraction) << "\n"
      << "finetune_epochs = " << c.schedule.finetune_epochs << "\n"
      << "rewind = " << flag(c.schedule.rewind_to_init) << "\n\n";
  out << "[monitor]\nstop_on = ";
  for (std::size_t i = 0; i < c.monitor.monitored.size(); ++i) {
    out << (i ? "," : "") << to_string(c.monitor.monitored[i]);
  }
  out << "\nper_gate = " << flag(c.per_gate_reports) << "\n\n";
  out << "[output]\ndir = " << c.output_dir << "\n";
  return out.str();
}

ExperimentConfig load_config(const std::filesystem::path& path, bool check_paths) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  // Relative data paths are taken relative to the config file.
  ExperimentConfig c = parse_config(ss.str(), false);
  const auto base = path.parent_path();
  for (std::string* p : {&c.idx_images, &c.idx_labels, &c.csv_path}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).string();
  }
  if (check_paths) {
    auto violations = config_violations(c, true);
    if (!violations.empty()) {
      std::string msg = "invalid config '" + path.string() + "'";
      for (const std::string& v : violations) msg += "\n  " + v;
      throw ConfigError(msg);
    }
  }
  return c;
}

}  // namespace expander
