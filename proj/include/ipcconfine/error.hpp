#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ipcconfine {

enum class ErrorCode {
  InvalidName,
  InvalidAddress,
  DuplicateAlias,
  UnknownVm,
  UnknownProcess,
  HostRenameForbidden,
  AlreadyLoaded,
  NotLoaded,
  BadCategory,
  AlreadyExists,
  NotFound,
  CategoryMismatch,
  InvalidHandle,
  AddressInUse,
  InvalidPort,
  ParseError,
  ValidationError,
  ReplayError,
  InvalidParams,
  InvalidConfig,
  UnknownScenario,
};

std::string_view to_string(ErrorCode code);

/// Parses the textual form produced by to_string(ErrorCode). Throws
/// std::invalid_argument for unknown codes.
ErrorCode error_code_from_string(std::string_view text);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ipcconfine
