#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eivtls {

enum class ErrorCode {
  NonSquare,
  NotSymmetric,
  NonFinite,
  ShapeMismatch,
  DimensionMismatch,
  RankDeficientRows,
  RowRankDeficient,
  InconsistentExactRows,
  NotGeneric,
  NoGap,
  InfeasibleSpec,
  DimensionTooSmall,
  InvalidSlack,
  InvalidConfig,
  MalformedInput,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// True for the codes that signal a mathematical degeneracy of the data as
/// opposed to a malformed request.
bool is_solver_error(ErrorCode code);

}  // namespace eivtls
