// Copyright 2026 The fairdiv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRDIV_ERRORS_HPP_
#define FAIRDIV_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fairdiv {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- valuation ---

class AlphaOutOfRange : public Error {
 public:
  using Error::Error;
};

// Profile or density whose invariants fail (non-normalized, negative
// density, bad breakpoints, ...).
class InvalidDensity : public Error {
 public:
  using Error::Error;
};

class InvalidInterval : public Error {
 public:
  using Error::Error;
};

// --- protocol_dsl ---

struct SourcePos {
  int line = 0;  // 1-based; 0 means "no position"
  int column = 0;
};

enum class ParseErrorCode : std::uint8_t {
  kSyntaxError,
  kUnknownLabel,
  kAgentOutOfRange,
  kNumericLiteralInCondition,
};

class ParseError : public Error {
 public:
  ParseError(ParseErrorCode code, SourcePos pos, const std::string& message)
      : Error(format(code, pos, message)), code_(code), pos_(pos) {}

  ParseErrorCode code() const { return code_; }
  SourcePos pos() const { return pos_; }

  static std::string format(ParseErrorCode code, SourcePos pos,
                            const std::string& message);

 private:
  ParseErrorCode code_;
  SourcePos pos_;
};

// --- engine ---

class EngineError : public Error {
 public:
  using Error::Error;
};

class IllegalAction : public EngineError {
 public:
  using EngineError::EngineError;
};

class EmptyChooseSet : public EngineError {
 public:
  using EngineError::EngineError;
};

class UnboundLabel : public EngineError {
 public:
  using EngineError::EngineError;
};

class OverlappingAllocation : public EngineError {
 public:
  using EngineError::EngineError;
};

// --- protocols ---

class UnsupportedN : public Error {
 public:
  using Error::Error;
};

class InvalidAllocation : public Error {
 public:
  using Error::Error;
};

// --- solver ---

class DegenerateEps : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& message, std::uint64_t estimate)
      : Error(message), estimate_(estimate) {}
  std::uint64_t estimate() const { return estimate_; }

 private:
  std::uint64_t estimate_;
};

class CutOrdinalExceedsK : public Error {
 public:
  using Error::Error;
};

// --- auditor ---

class InfeasibleResolution : public Error {
 public:
  using Error::Error;
};

}  // namespace fairdiv

#endif  // FAIRDIV_ERRORS_HPP_
