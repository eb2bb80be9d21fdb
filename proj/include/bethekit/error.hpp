#pragma once

#include <stdexcept>
#include <string>

namespace bethekit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (length mismatch, wrong family, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A denominator of the rational form vanished, or two integrand poles merged.
class PoleError : public Error {
 public:
  PoleError(const std::string& what, int first, int second)
      : Error(what), first_(first), second_(second) {}

  /// Indices of the offending pair: (root, site) or (root, root), 0-based.
  int first() const noexcept { return first_; }
  int second() const noexcept { return second_; }

 private:
  int first_;
  int second_;
};

/// The equations carry no information (identically vanishing polynomial or
/// resultant). Perturbing the parameters usually helps.
class DegenerateSystem : public Error {
 public:
  using Error::Error;
};

/// A sum rule was requested for a twist it does not apply to.
class ApplicabilityError : public Error {
 public:
  using Error::Error;
};

/// No direction for the branch cut of u^beta avoids every pole pair.
class BranchPlacementError : public Error {
 public:
  using Error::Error;
};

}  // namespace bethekit
