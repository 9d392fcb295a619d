#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsem {

// Raised when an integration or estimation step produces a non-finite value.
// step_index identifies the first step whose update went non-finite.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::size_t step_index)
      : std::runtime_error(what), step_index_(step_index) {}

  std::size_t step_index() const noexcept { return step_index_; }

 private:
  std::size_t step_index_;
};

// Raised when a root finder cannot locate a sign change in its bracket.
class RootBracketError : public std::runtime_error {
 public:
  RootBracketError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}

  double bracket_lo() const noexcept { return lo_; }
  double bracket_hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

}  // namespace nsem
