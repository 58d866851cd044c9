#pragma once

#include <stdexcept>
#include <string>

namespace gnncert {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not line up (matrix product, layer chain, feature width).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or argument (bad preset, epochs = 0, gamma <= 0 ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A perturbation lemma was called outside its hypothesis. Never clamped.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace gnncert
