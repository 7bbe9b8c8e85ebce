#pragma once

#include <stdexcept>
#include <string>

namespace crossgan {

/// Bad user input: missing files, invalid configuration, unknown ids.
/// The command-line tool maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure reading or writing a file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A loss became NaN or infinite during training (exit code 2).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, long long iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  long long iteration() const noexcept { return iteration_; }

 private:
  long long iteration_;
};

}  // namespace crossgan
