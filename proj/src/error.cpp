// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/error.hpp"

namespace arisk {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kMissingColumn: return "MissingColumn";
    case ErrorKind::kBadRow: return "BadRow";
    case ErrorKind::kDanglingReference: return "DanglingReference";
    case ErrorKind::kUnknownSegment: return "UnknownSegment";
    case ErrorKind::kInsufficientCoverage: return "InsufficientCoverage";
    case ErrorKind::kNoWeatherCoverage: return "NoWeatherCoverage";
    case ErrorKind::kNoViableStrata: return "NoViableStrata";
    case ErrorKind::kUnknownFeature: return "UnknownFeature";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kUnknownGrouping: return "UnknownGrouping";
    case ErrorKind::kNonPositiveTau: return "NonPositiveTau";
    case ErrorKind::kSeparation: return "Separation";
    case ErrorKind::kNoConvergence: return "NoConvergence";
    case ErrorKind::kNonFiniteTarget: return "NonFiniteTarget";
    case ErrorKind::kZeroAcceptance: return "ZeroAcceptance";
    case ErrorKind::kTooFewDraws: return "TooFewDraws";
    case ErrorKind::kSingleChain: return "SingleChain";
    case ErrorKind::kEmptyScores: return "EmptyScores";
    case ErrorKind::kSingleClass: return "SingleClass";
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

void fail_missing_column(const std::string& source, const std::string& column) {
  fail(ErrorKind::kMissingColumn,
       "MissingColumn(\"" + source + "\", \"" + column + "\")");
}

void fail_bad_row(const std::string& source, long line,
                  const std::string& reason) {
  fail(ErrorKind::kBadRow, "BadRow(\"" + source + "\", " +
                               std::to_string(line) + ", \"" + reason + "\")");
}

void fail_dangling(const std::string& kind, const std::string& id) {
  fail(ErrorKind::kDanglingReference,
       "DanglingReference(\"" + kind + "\", \"" + id + "\")");
}

}  // namespace arisk
