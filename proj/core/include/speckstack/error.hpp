#pragma once

#include <stdexcept>
#include <string>

namespace speckstack {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Malformed file or wire payload.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A metric that is undefined for the given inputs (zero variance etc.).
class UndefinedMetricError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace speckstack
