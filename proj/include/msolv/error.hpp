#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msolv {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MSOLV_DEFINE_ERROR(name)          \
  class name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

MSOLV_DEFINE_ERROR(DimensionMismatch);
MSOLV_DEFINE_ERROR(MixedVariant);
MSOLV_DEFINE_ERROR(NotInvertible);
MSOLV_DEFINE_ERROR(NotNormal);
MSOLV_DEFINE_ERROR(NotSurjective);
MSOLV_DEFINE_ERROR(TooLarge);
MSOLV_DEFINE_ERROR(RingMismatch);
MSOLV_DEFINE_ERROR(LevelMismatch);
MSOLV_DEFINE_ERROR(PreconditionViolated);
MSOLV_DEFINE_ERROR(BadGeneratorIndex);
MSOLV_DEFINE_ERROR(IndexOutOfRange);
MSOLV_DEFINE_ERROR(RelatorNotInKernel);
MSOLV_DEFINE_ERROR(WordTooLong);
MSOLV_DEFINE_ERROR(NotAHomomorphism);

#undef MSOLV_DEFINE_ERROR

/// Thrown when an enumeration grows past its configured element cap.
class CapExceeded : public Error {
 public:
  CapExceeded(std::size_t size_so_far, std::size_t cap)
      : Error("group closure exceeded cap " + std::to_string(cap) + " (reached " +
              std::to_string(size_so_far) + " elements)"),
        size_so_far_(size_so_far),
        cap_(cap) {}

  std::size_t size_so_far() const noexcept { return size_so_far_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t size_so_far_;
  std::size_t cap_;
};

/// DSL / word syntax error with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::vector<std::string> expected,
             const std::string& detail = {})
      : Error(format(line, column, expected, detail)),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string format(std::size_t line, std::size_t column,
                            const std::vector<std::string>& expected, const std::string& detail) {
    std::string msg = "parse error at " + std::to_string(line) + ":" + std::to_string(column);
    if (!detail.empty()) msg += ": " + detail;
    if (!expected.empty()) {
      msg += " (expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) msg += ", ";
        msg += expected[i];
      }
      msg += ")";
    }
    return msg;
  }

  std::size_t line_;
  std::size_t column_;
  std::vector<std::string> expected_;
};

}  // namespace msolv
