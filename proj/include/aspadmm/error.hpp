#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aspadmm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t got)
      : Error(what + ": expected dimension " + std::to_string(expected) + ", got " +
              std::to_string(got)),
        expected_(expected),
        got_(got) {}
  std::size_t expected() const { return expected_; }
  std::size_t got() const { return got_; }

 private:
  std::size_t expected_;
  std::size_t got_;
};

class NotPsdError : public Error {
 public:
  NotPsdError(const std::string& what, double min_eig)
      : Error(what + " (min eigenvalue " + std::to_string(min_eig) + ")"), min_eig_(min_eig) {}
  double min_eig() const { return min_eig_; }

 private:
  double min_eig_;
};

// Iterative eigensolver ran out of iterations; carries its best estimate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_estimate)
      : Error(what), best_estimate_(best_estimate) {}
  double best_estimate() const { return best_estimate_; }

 private:
  double best_estimate_;
};

// Solver preconditions that fail before the first iteration.
class SetupError : public Error {
 public:
  using Error::Error;
};

class SubproblemError : public Error {
 public:
  using Error::Error;
};

}  // namespace aspadmm
