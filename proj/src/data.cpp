#include "expander/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "expander/errors.hpp"
#include "expander/matrix_io.hpp"
#include "expander/rng.hpp"

namespace expander {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  std::uint32_t u32be() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto out = std::span<const std::uint8_t>(bytes_).subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t offset() const { return pos_; }
  const std::string& name() const { return name_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(name_ + ": truncated at byte offset " + std::to_string(pos_) + " (need " +
                        std::to_string(n) + " more bytes, have " +
                        std::to_string(bytes_.size() - pos_) + ")");
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

void put_u32be(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                                 static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

std::size_t noisy_count(const NoiseSpec& spec, std::size_t total) {
  // The small offset keeps products like 0.2 * 784 = 156.8000...01 from
  // rounding up an extra position.
  const double raw = std::ceil(spec.fraction * static_cast<double>(total) - 1e-9);
  return std::min(total, static_cast<std::size_t>(std::max(raw, 0.0)));
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line, const std::string& file) {
  text = trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError(file + ":" + std::to_string(line) + ": bad number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

void SequenceDataset::validate() const {
  if (labels.size() != sequences.size()) {
    throw ShapeError("dataset: " + std::to_string(sequences.size()) + " sequences but " +
                     std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (sequences[i].rows() != steps || sequences[i].cols() != input_size) {
      throw ShapeError("dataset: sequence " + std::to_string(i) + " is " +
                       std::to_string(sequences[i].rows()) + "x" +
                       std::to_string(sequences[i].cols()) + ", expected " +
                       std::to_string(steps) + "x" + std::to_string(input_size));
    }
    if (labels[i] >= class_count) {
      throw DomainError("dataset: label " + std::to_string(labels[i]) + " of sequence " +
                        std::to_string(i) + " is not below class_count " +
                        std::to_string(class_count));
    }
    if (!sequences[i].all_finite()) {
      throw DomainError("dataset: sequence " + std::to_string(i) + " has non-finite values");
    }
  }
}

SequenceDataset SequenceDataset::subset(std::span<const std::size_t> indices) const {
  SequenceDataset out;
  out.steps = steps;
  out.input_size = input_size;
  out.class_count = class_count;
  out.sequences.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    out.sequences.push_back(sequences.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

SequenceDataset load_idx_images(const std::filesystem::path& images_path,
                                const std::filesystem::path& labels_path, std::size_t limit) {
  const auto image_bytes = read_bytes(images_path);
  const auto label_bytes = read_bytes(labels_path);
  ByteReader images(image_bytes, images_path.string());
  ByteReader labels(label_bytes, labels_path.string());

  if (std::uint32_t magic = images.u32be(); magic != kIdxImagesMagic) {
    throw FormatError(images.name() + ": bad magic at byte offset 0 (got 0x" +
                      [&] { std::ostringstream s; s << std::hex << magic; return s.str(); }() +
                      ", expected 0x803)");
  }
  if (std::uint32_t magic = labels.u32be(); magic != kIdxLabelsMagic) {
    throw FormatError(labels.name() + ": bad magic at byte offset 0 (got 0x" +
                      [&] { std::ostringstream s; s << std::hex << magic; return s.str(); }() +
                      ", expected 0x801)");
  }
  const std::size_t count = images.u32be();
  const std::size_t rows = images.u32be();
  const std::size_t cols = images.u32be();
  const std::size_t label_count = labels.u32be();
  if (label_count != count) {
    throw FormatError(labels.name() + ": " + std::to_string(label_count) + " labels for " +
                      std::to_string(count) + " images (byte offset 4)");
  }
  if (rows == 0 || cols == 0) throw FormatError(images.name() + ": zero image dimension at byte offset 8");

  const std::size_t n = limit > 0 ? std::min(limit, count) : count;
  SequenceDataset ds;
  ds.steps = rows;
  ds.input_size = cols;
  ds.sequences.reserve(n);
  ds.labels.reserve(n);
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto pixels = images.take(rows * cols);
    DenseMatrix seq(rows, cols);
    auto data = seq.data();
    for (std::size_t p = 0; p < pixels.size(); ++p) data[p] = pixels[p] / 255.0;
    ds.sequences.push_back(std::move(seq));
    const std::size_t label = labels.take(1)[0];
    max_label = std::max(max_label, label);
    ds.labels.push_back(label);
  }
  ds.class_count = n == 0 ? 0 : max_label + 1;
  return ds;
}

SequenceDataset add_noise(const SequenceDataset& ds, const NoiseSpec& spec) {
  if (!(spec.fraction >= 0.0 && spec.fraction <= 1.0)) {
    throw DomainError("add_noise: fraction must lie in [0, 1]");
  }
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) {
    throw DomainError("add_noise: sigma must be finite and non-negative");
  }
  SequenceDataset out = ds;
  const std::size_t total = ds.steps * ds.input_size;
  const std::size_t count = noisy_count(spec, total);
  if (count == 0 || spec.sigma == 0.0) return out;

  Rng rng(spec.seed);
  std::vector<std::size_t> positions(total);
  for (DenseMatrix& seq : out.sequences) {
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `count` slots become a uniform sample.
    for (std::size_t i = 0; i < count; ++i) {
      std::swap(positions[i], positions[i + rng.below(total - i)]);
    }
    auto data = seq.data();
    for (std::size_t i = 0; i < count; ++i) data[positions[i]] += spec.sigma * rng.normal();
  }
  return out;
}

std::string_view to_string(SynthKind kind) {
  return kind == SynthKind::running_parity ? "running-parity" : "mean-threshold";
}

SynthKind parse_synth_kind(std::string_view text) {
  if (text == "running-parity" || text == "running_parity" || text == "parity") {
    return SynthKind::running_parity;
  }
  if (text == "mean-threshold" || text == "mean_threshold" || text == "mean") {
    return SynthKind::mean_threshold;
  }
  throw DomainError("unknown synthetic task '" + std::string(text) + "'");
}

std::size_t synth_label(SynthKind kind, const DenseMatrix& sequence) {
  if (kind == SynthKind::running_parity) {
    std::size_t events = 0;
    for (std::size_t t = 0; t < sequence.rows(); ++t) {
      if (sequence.cols() > 0 && sequence(t, 0) > 0.5) ++events;
    }
    return events % 2;
  }
  double sum = 0.0;
  for (double x : sequence.data()) sum += x;
  return sum / static_cast<double>(sequence.size()) > 0.5 ? 1 : 0;
}

SequenceDataset synth_task(const SynthSpec& spec) {
  if (spec.samples == 0 || spec.steps == 0 || spec.input_size == 0) {
    throw DomainError("synth_task: samples, steps and input_size must be at least 1");
  }
  if (spec.kind == SynthKind::running_parity && (spec.max_events == 0 || spec.max_events > spec.steps)) {
    throw DomainError("synth_task: max_events must lie in [1, steps]");
  }
  Rng rng(spec.seed);
  SequenceDataset ds;
  ds.steps = spec.steps;
  ds.input_size = spec.input_size;
  ds.class_count = 2;
  ds.sequences.reserve(spec.samples);
  ds.labels.reserve(spec.samples);
  std::vector<std::size_t> order(spec.steps);

  for (std::size_t i = 0; i < spec.samples; ++i) {
    const std::size_t label = i % 2;
    DenseMatrix seq(spec.steps, spec.input_size);
    if (spec.kind == SynthKind::running_parity) {
      std::vector<std::size_t> counts;
      for (std::size_t c = label; c <= spec.max_events; c += 2) counts.push_back(c);
      const std::size_t events = counts[rng.below(counts.size())];
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t e = 0; e < events; ++e) {
        std::swap(order[e], order[e + rng.below(spec.steps - e)]);
      }
      for (std::size_t e = 0; e < events; ++e) seq(order[e], 0) = 1.0;
      for (std::size_t t = 0; t < spec.steps; ++t) {
        for (std::size_t j = 1; j < spec.input_size; ++j) seq(t, j) = rng.uniform();
      }
    } else {
      // Rejection on the label keeps the classes exactly balanced.
      do {
        const double centre = rng.uniform(0.25, 0.75);
        for (double& x : seq.data()) x = centre + rng.uniform(-0.25, 0.25);
      } while (synth_label(spec.kind, seq) != label);
    }
    ds.sequences.push_back(std::move(seq));
    ds.labels.push_back(label);
  }
  return ds;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DomainError("train_test_split: test fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  std::size_t n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  if (n >= 2) n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  std::vector<std::size_t> test(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  return {std::move(train), std::move(test)};
}

std::pair<SequenceDataset, SequenceDataset> train_test_split(const SequenceDataset& ds,
                                                             double test_fraction,
                                                             std::uint64_t seed) {
  auto [train, test] = split_indices(ds.size(), test_fraction, seed);
  return {ds.subset(train), ds.subset(test)};
}

SequenceDataset load_csv_sequences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::string file = path.string();
  std::string line;
  std::size_t line_no = 0;
  SequenceDataset ds;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = split_commas(view);
    if (!header) {
      if (fields.size() != 3) {
        throw FormatError(file + ":" + std::to_string(line_no) +
                          ": header must be k,input_size,class_count");
      }
      ds.steps = parse_number<std::size_t>(fields[0], line_no, file);
      ds.input_size = parse_number<std::size_t>(fields[1], line_no, file);
      ds.class_count = parse_number<std::size_t>(fields[2], line_no, file);
      if (ds.steps == 0 || ds.input_size == 0 || ds.class_count == 0) {
        throw FormatError(file + ":" + std::to_string(line_no) + ": header values must be positive");
      }
      header = true;
      continue;
    }
    const std::size_t expected = 1 + ds.steps * ds.input_size;
    if (fields.size() != expected) {
      throw FormatError(file + ":" + std::to_string(line_no) + ": " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(expected));
    }
    const std::size_t label = parse_number<std::size_t>(fields[0], line_no, file);
    if (label >= ds.class_count) {
      throw FormatError(file + ":" + std::to_string(line_no) + ": label " + std::to_string(label) +
                        " is not below class_count");
    }
    std::vector<double> values(expected - 1);
    for (std::size_t i = 1; i < expected; ++i) {
      values[i - 1] = parse_number<double>(fields[i], line_no, file);
      if (!std::isfinite(values[i - 1])) {
        throw FormatError(file + ":" + std::to_string(line_no) + ": non-finite value");
      }
    }
    ds.sequences.emplace_back(ds.steps, ds.input_size, std::move(values));
    ds.labels.push_back(label);
  }
  if (!header) throw FormatError(file + ": missing header line");
  return ds;
}

void write_csv_sequences(const SequenceDataset& ds, const std::filesystem::path& path) {
  auto out = open_out(path, std::ios::out | std::ios::trunc);
  out << ds.steps << ',' << ds.input_size << ',' << ds.class_count << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.labels[i];
    for (double x : ds.sequences[i].data()) out << ',' << format_double(x);
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_idx_images(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                      const std::vector<std::vector<std::uint8_t>>& images) {
  auto out = open_out(path, std::ios::binary | std::ios::trunc);
  put_u32be(out, kIdxImagesMagic);
  put_u32be(out, static_cast<std::uint32_t>(images.size()));
  put_u32be(out, static_cast<std::uint32_t>(rows));
  put_u32be(out, static_cast<std::uint32_t>(cols));
  for (const auto& img : images) {
    if (img.size() != rows * cols) throw ShapeError("write_idx_images: image size mismatch");
    out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  auto out = open_out(path, std::ios::binary | std::ios::trunc);
  put_u32be(out, kIdxLabelsMagic);
  put_u32be(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace expander
