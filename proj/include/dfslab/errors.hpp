// errors.hpp — exception hierarchy shared by every dfslab module

#pragma once

#include <stdexcept>
#include <string>

namespace dfslab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not fit together (dim mismatch, non-square, wrong size).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input outside the mathematical domain of an operation (non-Hermitian,
// non-SPD, non-finite, zero vector, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A construction would exceed the configured dimension budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// The caller asked for something the API does not support in that state
// (unknown mode label, missing factorization, unsupported initial state).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Group closure did not terminate within the allowed order.
class NonClosureError : public Error {
 public:
  using Error::Error;
};

// Valid input that has no finite-dimensional realization in this library.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace dfslab
