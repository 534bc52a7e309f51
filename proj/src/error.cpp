#include "staterecall/error.hpp"

namespace staterecall {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::DuplicateIdentity: return "DuplicateIdentity";
    case ErrorCode::NonNumericTarget: return "NonNumericTarget";
    case ErrorCode::EmptyCatalog: return "EmptyCatalog";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::UnknownParticle: return "UnknownParticle";
    case ErrorCode::SelfCollision: return "SelfCollision";
    case ErrorCode::CatalogTooSmall: return "CatalogTooSmall";
    case ErrorCode::PoolExhausted: return "PoolExhausted";
    case ErrorCode::DegenerateNoUndo: return "DegenerateNoUndo";
    case ErrorCode::InsufficientVariables: return "InsufficientVariables";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MixedFamilies: return "MixedFamilies";
    case ErrorCode::DuplicateInstance: return "DuplicateInstance";
    case ErrorCode::ZeroTotal: return "ZeroTotal";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace staterecall
