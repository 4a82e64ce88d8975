#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace renass {

struct Violation {
  std::string path;
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// Every invariant violation found in a model; empty means valid.
using ValidationReport = std::vector<Violation>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class RuleMissingError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

class ParamError : public Error {
 public:
  using Error::Error;
};

class EndOfHorizonError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedConfigError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace renass
