#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace expander {

enum class ErrorCode {
  shape,
  domain,
  format,
  size,
  degenerate_graph,
  io,
  config,
};

/// Stable machine-readable prefix, e.g. "E_SHAPE".
std::string_view error_code_name(ErrorCode code);

/// Process exit status used by the CLI for each error class.
int error_exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorCode::shape, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorCode::format, what) {}
};

class SizeError : public Error {
 public:
  explicit SizeError(const std::string& what) : Error(ErrorCode::size, what) {}
};

class DegenerateGraphError : public Error {
 public:
  explicit DegenerateGraphError(const std::string& what)
      : Error(ErrorCode::degenerate_graph, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::config, what) {}
};

}  // namespace expander
