#pragma once

#include <stdexcept>
#include <string>

namespace rashgam {

/// Base class for domain errors. `code()` is a stable machine-readable tag
/// used by the HTTP service and the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Vector/matrix dimensions disagree with the object they are applied to.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension_mismatch", what) {}
};

/// Malformed input data (CSV rows, labels, JSON documents).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error("data_error", what) {}
};

/// A feature value falls outside the bin edges of its feature.
class OutOfRangeError : public Error {
 public:
  OutOfRangeError(const std::string& what, std::size_t feature, std::size_t row)
      : Error("out_of_range", what), feature_(feature), row_(row) {}
  std::size_t feature() const noexcept { return feature_; }
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t feature_;
  std::size_t row_;
};

/// Invalid binning spec, support, merge plan or configuration.
class SpecError : public Error {
 public:
  explicit SpecError(const std::string& what) : Error("spec_error", what) {}
};

class EmptyRashomonSetError : public Error {
 public:
  explicit EmptyRashomonSetError(const std::string& what) : Error("empty_rashomon_set", what) {}
};

/// Enumeration would exceed the configured guard (e.g. 2^B sign patterns).
class EnumerationLimitError : public Error {
 public:
  explicit EnumerationLimitError(const std::string& what) : Error("enumeration_limit", what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error("numerical_error", what) {}
};

}  // namespace rashgam
