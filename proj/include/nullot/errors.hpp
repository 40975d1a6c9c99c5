#pragma once

#include <stdexcept>
#include <string>

namespace nullot {

/// Malformed or inconsistent input data (bad file, broken invariant, unknown ray id).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Operation applied outside its admissible domain; carries the admissible range.
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}
  double admissible_lo() const { return lo_; }
  double admissible_hi() const { return hi_; }

 private:
  double lo_, hi_;
};

/// Invalid scalar parameter (N out of range, non-positive step, ...).
class ParamError : public std::runtime_error {
 public:
  explicit ParamError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nullot
