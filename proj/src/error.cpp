#include "eivtls/error.hpp"

namespace eivtls {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficientRows: return "RankDeficientRows";
    case ErrorCode::RowRankDeficient: return "RowRankDeficient";
    case ErrorCode::InconsistentExactRows: return "InconsistentExactRows";
    case ErrorCode::NotGeneric: return "NotGeneric";
    case ErrorCode::NoGap: return "NoGap";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::InvalidSlack: return "InvalidSlack";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

bool is_solver_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficientRows:
    case ErrorCode::RowRankDeficient:
    case ErrorCode::InconsistentExactRows:
    case ErrorCode::NotGeneric:
    case ErrorCode::NoGap:
      return true;
    default:
      return false;
  }
}

}  // namespace eivtls
