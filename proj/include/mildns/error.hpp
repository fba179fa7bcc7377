#pragma once

#include <stdexcept>
#include <string>

namespace mildns {

/// Failure categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
  config,      // invalid parameters, exponents or experiment configuration
  domain,      // operator argument outside its domain (t < 0, s >= 0 for Besov, ...)
  shape,       // wrong component count or mismatched lattices/meshes
  data,        // non-finite or non-positive data where forbidden
  window,      // request leaves the periodization validity window
  numerical,   // divergence or non-convergence of an iteration
  io
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error(ErrorKind::shape, w) {}
};
struct DataError : Error {
  explicit DataError(const std::string& w) : Error(ErrorKind::data, w) {}
};
struct WindowError : Error {
  explicit WindowError(const std::string& w) : Error(ErrorKind::window, w) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error(ErrorKind::numerical, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

/// Exit code convention of the mildns tool: 2 config, 3 numerical, 4 I/O.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::numerical: return 3;
    case ErrorKind::io: return 4;
    default: return 2;
  }
}

}  // namespace mildns
