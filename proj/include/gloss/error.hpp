#pragma once

#include <stdexcept>
#include <string>

namespace gloss {

/// Raised on malformed or inconsistent input (files, specs, cross-references).
/// The CLI maps this to exit code 1.
class LoadError : public std::runtime_error {
public:
  explicit LoadError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a library-internal invariant is violated. The CLI maps this
/// to exit code 2.
class InternalError : public std::logic_error {
public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

namespace detail {

inline std::string at_line(int line_no, const std::string& msg) {
  return "line " + std::to_string(line_no) + ": " + msg;
}

}  // namespace detail

}  // namespace gloss
