#include "nncis/error.hpp"

namespace nncis {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateDomain: return "DegenerateDomain";
    case ErrorCode::NonPositiveResolution: return "NonPositiveResolution";
    case ErrorCode::EmptySafeSet: return "EmptySafeSet";
    case ErrorCode::AlreadyBasis: return "AlreadyBasis";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownVar: return "UnknownVar";
    case ErrorCode::InfiniteBound: return "InfiniteBound";
    case ErrorCode::EmptyTarget: return "EmptyTarget";
    case ErrorCode::EmptyCis: return "EmptyCis";
    case ErrorCode::X0OutsideDomain: return "X0OutsideDomain";
    case ErrorCode::OutsideCis: return "OutsideCis";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace nncis
