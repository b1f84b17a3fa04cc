// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mcharvest {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not reach its accuracy contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcharvest
