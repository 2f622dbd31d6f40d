#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coalsim {

/// Malformed measure spec or other textual input; `position` is a 0-based
/// byte offset into the offending string.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Parameter outside its mathematical domain (nonpositive mass, alpha outside
/// [1,2], unsorted order statistics, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double achieved_error)
      : std::runtime_error(what + ": estimate " + std::to_string(estimate) +
                           ", achieved error " + std::to_string(achieved_error)),
        estimate_(estimate),
        achieved_error_(achieved_error) {}
  double estimate() const noexcept { return estimate_; }
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double estimate_;
  double achieved_error_;
};

/// An experiment's preconditions do not hold (dusty measure, wrong alpha
/// regime, wrong coalescent family, integral not small).
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coalsim
