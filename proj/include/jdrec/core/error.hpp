#pragma once

#include <stdexcept>
#include <string>

namespace jdrec {

enum class ErrorKind {
  config,
  data,
  numeric,
  usage,
  io,
  generation_exhausted,
};

const char* to_string(ErrorKind kind) noexcept;

// Base of every error the library throws. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorKind::config, m) {}
};
struct DataError : Error {
  explicit DataError(const std::string& m) : Error(ErrorKind::data, m) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(ErrorKind::numeric, m) {}
};
struct UsageError : Error {
  explicit UsageError(const std::string& m) : Error(ErrorKind::usage, m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorKind::io, m) {}
};
struct GenerationExhausted : Error {
  explicit GenerationExhausted(const std::string& m)
      : Error(ErrorKind::generation_exhausted, m) {}
};

}  // namespace jdrec
