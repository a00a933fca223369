#pragma once

#include <stdexcept>
#include <string>

namespace softq {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model validation failures.
class NonStochasticRow final : public Error {
 public:
  using Error::Error;
};
class NegativeProbability final : public Error {
 public:
  using Error::Error;
};
class RewardOutOfBounds final : public Error {
 public:
  using Error::Error;
};
class InvalidDiscount final : public Error {
 public:
  using Error::Error;
};
class ZeroVisitProbability final : public Error {
 public:
  using Error::Error;
};
class IndexOutOfRange final : public Error {
 public:
  using Error::Error;
};

// Numeric-input failures.
class EmptyActionSet final : public Error {
 public:
  using Error::Error;
};
class NonFiniteInput final : public Error {
 public:
  using Error::Error;
};
class DimensionMismatch final : public Error {
 public:
  using Error::Error;
};

// Iterative-solver failures.
class NotConverged final : public Error {
 public:
  using Error::Error;
};
class Reducible final : public Error {
 public:
  using Error::Error;
};

// Sampling / co-simulation failures.
class DistributionMismatch final : public Error {
 public:
  using Error::Error;
};

// Configuration failures.
class ParseError final : public Error {
 public:
  using Error::Error;
};
class ValidationError final : public Error {
 public:
  using Error::Error;
};
class IoError final : public Error {
 public:
  using Error::Error;
};

}  // namespace softq
