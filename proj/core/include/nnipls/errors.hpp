#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nnipls {

/// Base class for every error raised by the library. The category maps onto
/// the command-line exit codes (config 2, numeric 3, I/O 4).
class Error : public std::runtime_error {
 public:
  enum class Category { kInvalidArgument, kConfig, kNumeric, kIo };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(Category::kInvalidArgument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Category::kConfig, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Category::kNumeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Category::kIo, what) {}
};

/// Malformed extended-XYZ input. Carries the zero-based frame index.
class ParseError : public Error {
 public:
  ParseError(std::size_t frame, const std::string& what)
      : Error(Category::kIo, "frame " + std::to_string(frame) + ": " + what),
        frame_(frame) {}

  std::size_t frame() const noexcept { return frame_; }

 private:
  std::size_t frame_;
};

/// Two atoms at the same position: pair terms are undefined.
class SingularGeometry : public NumericError {
 public:
  SingularGeometry(std::size_t i, std::size_t j)
      : NumericError("coincident atoms " + std::to_string(i) + " and " + std::to_string(j)),
        first(i),
        second(j) {}

  std::size_t first;
  std::size_t second;
};

/// Random direction with a zero-norm filter block where the weights are not zero.
class DegenerateDirection : public NumericError {
 public:
  explicit DegenerateDirection(const std::string& what) : NumericError(what) {}
};

}  // namespace nnipls
