#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "expander/recurrent.hpp"
#include "expander/weights.hpp"

namespace expander {

inline constexpr char kCheckpointMagic[4] = {'R', 'P', 'R', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  RecurrentParams params;
  PruneMask mask;
};

// Binary layout, all integers and floats little-endian:
//   "RPRM" | version u32 | cell u8 (0 rnn, 1 lstm) | input u32 | hidden u32 | classes u32
//   5 matrices in order w_xh, w_hh, w_hy, b_h (n x 1), b_y (n x 1):
//     rows u32 | cols u32 | rows*cols f64 row-major
//   3 masks in order w_xh, w_hh, w_hy:
//     rows u32 | cols u32 | ceil(rows*cols / 8) bytes, bit i of the flat
//     row-major index at byte i/8, bit position i%8 (LSB first)

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// True when the file starts with the checkpoint magic.
bool is_checkpoint_file(const std::filesystem::path& path);

}  // namespace expander
