#pragma once

#include <stdexcept>
#include <string>

namespace rsw {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  GridMismatch() : Error("fields live on different grids") {}
};

/// The change of variables h -> lambda = 2 sqrt(g h) is invalid.
class NonPositiveHeight : public Error {
 public:
  explicit NonPositiveHeight(double min_value)
      : Error("non-positive height (min = " + std::to_string(min_value) + ")"), min_value_(min_value) {}
  double min_value() const { return min_value_; }

 private:
  double min_value_;
};

class NonPositiveLambda : public Error {
 public:
  explicit NonPositiveLambda(double min_value)
      : Error("non-positive lambda (min = " + std::to_string(min_value) + ")"), min_value_(min_value) {}
  double min_value() const { return min_value_; }

 private:
  double min_value_;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

/// Raised by the fixed-point window solver when successive iterates stop shrinking.
class NotContracting : public Error {
 public:
  using Error::Error;
};

class TooFewSamples : public Error {
 public:
  using Error::Error;
};

}  // namespace rsw
