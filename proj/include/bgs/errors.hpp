#pragma once

#include <stdexcept>
#include <string>

namespace bgs {

/// Caller broke a documented precondition (shape mismatch, bad parameter).
class ContractError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Triangular solve hit an exactly zero diagonal entry.
class SingularError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Jacobi SVD did not settle within its sweep budget.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Skeleton/muscle pairing that the skeleton does not accept.
class IncompatibleError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace bgs
