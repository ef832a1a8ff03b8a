#pragma once

#include <stdexcept>
#include <string>

namespace genlik {

// Base class for everything the library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// A grid or vector fails the distribution invariants (negative entry,
// or total mass further than 1e-9 from 1).
struct InvalidDistribution : Error {
  using Error::Error;
};

// ln of a zero term that carries positive observation weight.
struct LogOfZero : Error {
  using Error::Error;
};

struct NonPositiveBeta : Error {
  using Error::Error;
};

// beta outside the range a solver supports (e.g. the known-average
// solver accepts only beta in (0,1); beta>1 problems live in the
// sparse/majorization module).
struct UnsupportedBeta : Error {
  using Error::Error;
};

struct AllZeroColumn : Error {
  using Error::Error;
};

struct SupportViolation : Error {
  using Error::Error;
};

struct InnerOptimizerFailure : Error {
  using Error::Error;
};

// Constraint target outside the achievable interval, or an empty
// constraint polytope.
struct Infeasible : Error {
  using Error::Error;
};

struct RootBracketFailure : Error {
  using Error::Error;
};

struct RootSolveFailure : Error {
  using Error::Error;
};

struct InfeasibleConstraints : Error {
  using Error::Error;
};

struct RejectionBudgetExhausted : Error {
  using Error::Error;
};

struct MomentSolveFailure : Error {
  using Error::Error;
};

struct UsageError : Error {
  using Error::Error;
};

}  // namespace genlik
