#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "expander/linalg.hpp"

namespace expander {

// Text format: a header line "matx <rows> <cols>" followed by rows*cols
// whitespace-separated decimal values in row-major order. Lines starting
// with '#' are comments.

DenseMatrix parse_matx(std::string_view text);
std::string format_matx(const DenseMatrix& m);

DenseMatrix load_matx(const std::filesystem::path& path);
void save_matx(const std::filesystem::path& path, const DenseMatrix& m);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace expander
