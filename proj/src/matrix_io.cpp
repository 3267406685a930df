#include "expander/matrix_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "expander/errors.hpp"

namespace expander {

namespace {

std::string_view next_token(std::string_view text, std::size_t& pos, std::size_t& line) {
  while (pos < text.size()) {
    const char c = text[pos];
    if (c == '#') {
      while (pos < text.size() && text[pos] != '\n') ++pos;
    } else if (c == '\n') {
      ++line;
      ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < text.size() && text[pos] != ' ' && text[pos] != '\t' && text[pos] != '\n' &&
         text[pos] != '\r' && text[pos] != '#') {
    ++pos;
  }
  return text.substr(start, pos - start);
}

template <typename T>
T to_number(std::string_view token, std::size_t line, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw FormatError("matx line " + std::to_string(line) + ": bad " + what + " '" +
                      std::string(token) + "'");
  }
  return value;
}

}  // namespace

DenseMatrix parse_matx(std::string_view text) {
  std::size_t pos = 0;
  std::size_t line = 1;
  std::string_view tag = next_token(text, pos, line);
  if (tag != "matx") {
    throw FormatError("matx line " + std::to_string(line) + ": expected header 'matx <rows> <cols>'");
  }
  const auto rows = to_number<std::size_t>(next_token(text, pos, line), line, "row count");
  const auto cols = to_number<std::size_t>(next_token(text, pos, line), line, "column count");
  if (rows == 0 || cols == 0) throw FormatError("matx: dimensions must be positive");
  std::vector<double> values;
  values.reserve(rows * cols);
  while (true) {
    std::string_view tok = next_token(text, pos, line);
    if (tok.empty()) break;
    if (values.size() == rows * cols) {
      throw FormatError("matx line " + std::to_string(line) + ": more than " +
                        std::to_string(rows * cols) + " values");
    }
    const double v = to_number<double>(tok, line, "value");
    if (!std::isfinite(v)) {
      throw FormatError("matx line " + std::to_string(line) + ": non-finite value");
    }
    values.push_back(v);
  }
  if (values.size() != rows * cols) {
    throw FormatError("matx: " + std::to_string(values.size()) + " values, expected " +
                      std::to_string(rows * cols));
  }
  return DenseMatrix(rows, cols, std::move(values));
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string format_matx(const DenseMatrix& m) {
  std::string out = "matx " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ' ';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

DenseMatrix load_matx(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_matx(ss.str());
}

void save_matx(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << format_matx(m);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace expander
