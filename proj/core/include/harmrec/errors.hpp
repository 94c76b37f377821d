#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace harmrec {

/// Bad shapes, counts or parameters supplied by the caller.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input lies outside the mathematical domain of the operation.
class OutOfDomain : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A dense allocation would exceed the configured memory budget.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, std::size_t required_bytes, std::size_t budget_bytes)
      : std::runtime_error(what + " (requires " + std::to_string(required_bytes) +
                           " bytes, budget " + std::to_string(budget_bytes) + " bytes)"),
        required_bytes_(required_bytes),
        budget_bytes_(budget_bytes) {}

  std::size_t required_bytes() const noexcept { return required_bytes_; }
  std::size_t budget_bytes() const noexcept { return budget_bytes_; }

 private:
  std::size_t required_bytes_;
  std::size_t budget_bytes_;
};

class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, double magnitude)
      : std::runtime_error(what), magnitude_(magnitude) {}

  /// Smallest eigenvalue magnitude found.
  double magnitude() const noexcept { return magnitude_; }

 private:
  double magnitude_;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_estimate)
      : std::runtime_error(what), last_estimate_(last_estimate) {}

  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

/// An iterate became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// Relative error requested against a zero reference.
class UndefinedReference : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace harmrec
