// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace arisk {

enum class ErrorKind {
  kInvalidArgument,
  kIo,
  kMissingColumn,
  kBadRow,
  kDanglingReference,
  kUnknownSegment,
  kInsufficientCoverage,
  kNoWeatherCoverage,
  kNoViableStrata,
  kUnknownFeature,
  kDimensionMismatch,
  kUnknownGrouping,
  kNonPositiveTau,
  kSeparation,
  kNoConvergence,
  kNonFiniteTarget,
  kZeroAcceptance,
  kTooFewDraws,
  kSingleChain,
  kEmptyScores,
  kSingleClass,
  kInvalidConfig,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the core library. The C API maps `kind()` onto
/// its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

// Constructors for the structured errors whose messages tests inspect.
[[noreturn]] void fail_missing_column(const std::string& source,
                                      const std::string& column);
[[noreturn]] void fail_bad_row(const std::string& source, long line,
                               const std::string& reason);
[[noreturn]] void fail_dangling(const std::string& kind, const std::string& id);

}  // namespace arisk
