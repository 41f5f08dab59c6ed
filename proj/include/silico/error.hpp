#pragma once

#include <stdexcept>
#include <string>

namespace silico {

/// Failure classes. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  Usage = 1,
  MissingInput = 2,
  Validation = 3,
  Provider = 4,
  Io = 5,
  Internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace silico
