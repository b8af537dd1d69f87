#pragma once

#include <stdexcept>
#include <string>

namespace itrap {

/// Bad or inconsistent user configuration (maps to CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed: collision, blow-up, lost ion, non-finite
/// values (maps to CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}
}  // namespace detail

}  // namespace itrap
