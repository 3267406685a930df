#include "expander/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "expander/errors.hpp"

namespace expander {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

// Guards against absurd allocations from corrupt headers.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 28;

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_matrix(std::ostream& out, std::size_t rows, std::size_t cols, std::span<const double> data) {
  put_u32(out, static_cast<std::uint32_t>(rows));
  put_u32(out, static_cast<std::uint32_t>(cols));
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
}

void put_mask(std::ostream& out, const LayerMask& m) {
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  std::vector<char> bytes((m.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.at(i)) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (1 << (i % 8)));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw FormatError("checkpoint truncated at byte offset " +
                        std::to_string(offset_ + static_cast<std::size_t>(in_.gcount())));
    }
    offset_ += n;
  }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    read(&v, sizeof v);
    return v;
  }

  std::uint8_t u8() {
    std::uint8_t v = 0;
    read(&v, 1);
    return v;
  }

  std::pair<std::size_t, std::size_t> dims(const char* what) {
    const std::size_t at = offset_;
    const std::uint64_t rows = u32();
    const std::uint64_t cols = u32();
    if (rows * cols > kMaxElements) {
      throw FormatError(std::string("checkpoint: ") + what + " at byte offset " +
                        std::to_string(at) + " is implausibly large");
    }
    return {static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)};
  }

  DenseMatrix matrix(const char* what) {
    const std::size_t at = offset_;
    auto [rows, cols] = dims(what);
    std::vector<double> data(rows * cols);
    read(data.data(), data.size() * sizeof(double));
    for (double x : data) {
      if (!std::isfinite(x)) {
        throw FormatError(std::string("checkpoint: ") + what + " at byte offset " +
                          std::to_string(at) + " has non-finite values");
      }
    }
    return DenseMatrix(rows, cols, std::move(data));
  }

  LayerMask mask(const char* what) {
    auto [rows, cols] = dims(what);
    LayerMask m(rows, cols, false);
    std::vector<unsigned char> bytes((m.size() + 7) / 8);
    read(bytes.data(), bytes.size());
    for (std::size_t i = 0; i < m.size(); ++i) m.set_flat(i, (bytes[i / 8] >> (i % 8)) & 1U);
    return m;
  }

  std::size_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::size_t offset_ = 0;
};

std::vector<double> column(const DenseMatrix& m) {
  auto d = m.data();
  return std::vector<double>(d.begin(), d.end());
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const RecurrentParams& p = ckpt.params;
  p.validate();
  out.write(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  const char cell = p.cell == CellKind::lstm ? 1 : 0;
  out.write(&cell, 1);
  put_u32(out, static_cast<std::uint32_t>(p.input_size));
  put_u32(out, static_cast<std::uint32_t>(p.hidden_size));
  put_u32(out, static_cast<std::uint32_t>(p.class_count));
  put_matrix(out, p.w_xh.rows(), p.w_xh.cols(), p.w_xh.data());
  put_matrix(out, p.w_hh.rows(), p.w_hh.cols(), p.w_hh.data());
  put_matrix(out, p.w_hy.rows(), p.w_hy.cols(), p.w_hy.data());
  put_matrix(out, p.b_h.size(), 1, p.b_h);
  put_matrix(out, p.b_y.size(), 1, p.b_y);
  put_mask(out, ckpt.mask.xh);
  put_mask(out, ckpt.mask.hh);
  put_mask(out, ckpt.mask.hy);
  if (!out) throw IoError("checkpoint write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader r(in);
  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw FormatError("checkpoint: bad magic at byte offset 0");
  }
  if (std::uint32_t version = r.u32(); version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version) +
                      " at byte offset 4");
  }
  Checkpoint ck;
  RecurrentParams& p = ck.params;
  const std::uint8_t cell = r.u8();
  if (cell > 1) throw FormatError("checkpoint: bad cell kind at byte offset 8");
  p.cell = cell == 1 ? CellKind::lstm : CellKind::rnn;
  p.input_size = r.u32();
  p.hidden_size = r.u32();
  p.class_count = r.u32();
  p.w_xh = r.matrix("w_xh");
  p.w_hh = r.matrix("w_hh");
  p.w_hy = r.matrix("w_hy");
  p.b_h = column(r.matrix("b_h"));
  p.b_y = column(r.matrix("b_y"));
  ck.mask.xh = r.mask("w_xh mask");
  ck.mask.hh = r.mask("w_hh mask");
  ck.mask.hy = r.mask("w_hy mask");
  try {
    p.validate();
  } catch (const ShapeError& e) {
    throw FormatError(std::string("checkpoint: inconsistent shapes: ") + e.what());
  }
  if (!ck.mask.xh.congruent(p.w_xh) || !ck.mask.hh.congruent(p.w_hh) ||
      !ck.mask.hy.congruent(p.w_hy)) {
    throw FormatError("checkpoint: mask shapes do not match the weights");
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_checkpoint(in);
}

bool is_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::memcmp(magic, kCheckpointMagic, 4) == 0;
}

}  // namespace expander
