/* Copyright (c) 2026 The alut Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <stdexcept>
#include <string>

namespace alut {

// Root of every error thrown by the library. The CLI maps the subclasses
// onto exit codes (IoError -> 2, everything else -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value outside the domain an operation accepts (pixel out of [0,255],
// tau <= 0, bit depth not a multiple of 8, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Mismatched dimensions between tables, patches, images or stages.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Access outside an image without sufficient padding.
class BoundsError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during training or fusion.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Table container decoding failures. Each failure mode has its own type so
// callers can tell a corrupt file from a foreign one.
class FormatError : public Error {
 public:
  using Error::Error;
};

class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace alut
