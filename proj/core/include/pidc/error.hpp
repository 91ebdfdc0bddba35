#pragma once

#include <stdexcept>
#include <string>

namespace pidc {

enum class error_kind {
  invalid_argument,
  parse,
  undefined_complexity,
  size_limit,
  invariant,
  io,
  divergence,
};

// Single exception type for the library; the kind drives CLI exit codes.
class error : public std::runtime_error {
 public:
  error(error_kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  error_kind kind() const noexcept { return kind_; }

 private:
  error_kind kind_;
};

[[noreturn]] inline void fail(error_kind kind, const std::string& what) {
  throw error(kind, what);
}

}  // namespace pidc
