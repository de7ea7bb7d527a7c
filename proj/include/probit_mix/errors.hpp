#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace probit_mix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Cholesky factorization hit a non-positive pivot.
class NotPositiveDefiniteError : public Error {
 public:
  NotPositiveDefiniteError(const std::string& what, std::size_t pivot)
      : Error(what + " not positive definite (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class DegenerateLeverageError : public Error {
 public:
  explicit DegenerateLeverageError(std::size_t site)
      : Error("degenerate leverage at site " + std::to_string(site) + " (h_i >= 1)"), site_(site) {}

  std::size_t site() const noexcept { return site_; }

 private:
  std::size_t site_;
};

class CouplingError : public Error {
 public:
  using Error::Error;
};

/// The TV bound curve never dropped below the requested threshold on its grid.
class GridExhaustedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace probit_mix
