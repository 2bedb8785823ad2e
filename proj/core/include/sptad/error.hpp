// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sptad {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input or configuration rejected by a type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DegenerateSegment : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OddLength : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonPositiveLength : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TooManyGroundTruths : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnknownClass : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidConfig : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidSpec : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Failure reading or writing a file.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents; the message carries the line or field path.
class ParseError : public IoError {
 public:
  using IoError::IoError;
};

/// Well-formed file whose contents violate a schema invariant.
class SchemaError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace sptad
