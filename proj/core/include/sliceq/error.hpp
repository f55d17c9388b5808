#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sliceq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration failed one or more invariant checks.
///
/// Each entry of violations() names the offending field first, e.g.
/// "agent.epsilon: must be in (0, 1], got 1.5".
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = "invalid configuration";
    for (const auto& item : items) {
      out += "\n  ";
      out += item;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

}  // namespace sliceq
