#pragma once

#include <stdexcept>
#include <string>

namespace dirtail {

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed problem instance or configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation called on a spec that belongs to another regime.
class RegimeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Requested combination lies outside what the library implements.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Root finding or quadrature failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dirtail
