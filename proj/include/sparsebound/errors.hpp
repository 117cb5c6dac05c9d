#pragma once

#include <stdexcept>
#include <string>

namespace sparsebound {

/// Invalid argument or violated precondition.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A configured size cap (candidate count, enumeration size) would be exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation is not defined for the given model or distribution kind.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed or unresolvable experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sparsebound
