#pragma once

#include <stdexcept>
#include <string>

namespace seqknock {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied something outside an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Malformed or unusable user input (files, flags, schemas).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Base for failures of the numerical machinery on otherwise valid input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CollinearityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficient : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace seqknock
