#pragma once

// Shared error taxonomy and small numeric helpers used across the library.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nodal {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Base class for everything this library throws on its own behalf.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller handed us structurally invalid input (bad bounds, missing fields...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A document failed to parse against the published schema.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A name or id did not resolve (unknown fixture, unknown participant...).
class LookupError : public Error {
 public:
  using Error::Error;
};

// The numerics gave out (singular basis, failed factorization...).
class NumericError : public Error {
 public:
  using Error::Error;
};

inline bool almost_equal(double a, double b, double tol = 1e-6) {
  return std::fabs(a - b) <= tol * (1.0 + std::max(std::fabs(a), std::fabs(b)));
}

}  // namespace nodal
