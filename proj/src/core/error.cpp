#include "jdrec/core/error.hpp"

namespace jdrec {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return "config error";
    case ErrorKind::data: return "data error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::usage: return "usage error";
    case ErrorKind::io: return "io error";
    case ErrorKind::generation_exhausted: return "generation exhausted";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

}  // namespace jdrec
