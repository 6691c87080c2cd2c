// artic2ac/common/error.h

// Copyright 2026  artic2ac authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef ARTIC2AC_COMMON_ERROR_H_
#define ARTIC2AC_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace artic2ac {

// Base class for all recoverable errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor extents do not fit the requested operation.
struct ShapeError : Error {
  using Error::Error;
};

// Invalid or inconsistent input data (empty signals, missing pairings,
// precondition violations on rates/durations).
struct DataError : Error {
  using Error::Error;
};

// Malformed on-disk artifacts (container files, WAV, manifests).
struct FormatError : Error {
  using Error::Error;
};

struct BadMagicError : FormatError {
  using FormatError::FormatError;
};

struct BadVersionError : FormatError {
  using FormatError::FormatError;
};

struct TruncatedError : FormatError {
  using FormatError::FormatError;
};

struct DuplicateNameError : FormatError {
  using FormatError::FormatError;
};

// Weight file does not belong to the architecture it is being loaded into.
struct ArchMismatchError : FormatError {
  using FormatError::FormatError;
};

// Training produced a non-finite loss.
struct DivergenceError : Error {
  using Error::Error;
};

}  // namespace artic2ac

#endif  // ARTIC2AC_COMMON_ERROR_H_
