#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clarify {

// Every failure the library raises carries one of these codes. The C API
// maps them onto clarify_status values and the CLI onto exit codes.
enum class ErrorCode {
  // domain
  UnmappedLabel,
  OutOfRange,
  InvalidCategoryLetter,
  InvalidArgument,
  // dataset
  FileUnreadable,
  MalformedRow,
  DuplicateId,
  UnknownStatementId,
  DuplicateLabeler,
  EmptyCorpus,
  NoEligibleStatements,
  MissingArticle,
  // gateway
  BackendExhausted,
  BackendFailure,
  ScriptMiss,
  AuthFailure,
  // prompts
  MissingSlot,
  NoCategoryFound,
  NoRouteFound,
  NoScoreFound,
  // pipeline
  MissingCategory,
  WrongState,
  UnknownSession,
  // metrics
  LengthMismatch,
  EmptyAfterFilter,
  EmptyInput,
  NoOverlap,
  // analysis
  InvalidN,
  EmptySeed,
  // store
  StorageFailure,
  UnknownRun,
  // configuration
  ConfigError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Row-level dataset failure; `row` is the 1-based data row index (header
// excluded for CSV, line number for JSON-lines).
class RowError : public Error {
 public:
  RowError(ErrorCode code, std::size_t row, const std::string& message)
      : Error(code, "row " + std::to_string(row) + ": " + message), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace clarify
