#pragma once

#include <stdexcept>
#include <string>

namespace kslearn {

/// Precondition or range violation (bad arguments, data outside a partition, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A computation produced a non-finite value or could not be carried out.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace kslearn
