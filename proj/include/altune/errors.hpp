#pragma once

#include <stdexcept>
#include <string>

namespace altune {

/// Raised when a model is asked for something its kind cannot provide,
/// e.g. class probabilities from the non-probabilistic network.
class UnsupportedCapability : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Cholesky factorization failed even after the maximum jitter.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unknown configuration entry. `key()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace altune
