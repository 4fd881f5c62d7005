// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace pf2mp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or dimension contract violated by the caller.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced or received where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed, truncated, or version-mismatched binary/text artifact.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Expert planner or pose sampler could not produce a result.
class PlanningError : public Error {
 public:
  using Error::Error;
};

}  // namespace pf2mp
