#pragma once

#include <stdexcept>
#include <string>

namespace emzi {

/// Invalid physical input (non-positive energy, bad geometry ordering, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A propagation leg whose grid cannot represent the field without aliasing.
class SamplingViolation : public std::runtime_error {
 public:
  SamplingViolation(std::string leg, const std::string& what)
      : std::runtime_error(what), leg_(std::move(leg)) {}
  const std::string& leg() const noexcept { return leg_; }

 private:
  std::string leg_;
};

/// Numerical failure at run time (fit preconditions, empty windows, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace emzi
