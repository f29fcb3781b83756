#pragma once

#include <stdexcept>
#include <string>

namespace cdqkd {

/// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Raised when a channel configuration makes a quantity undefined
/// (a zero yield where an error rate is needed, zero variance with counts, ...).
class DegenerateError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Configuration could not be parsed or failed validation.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace cdqkd
