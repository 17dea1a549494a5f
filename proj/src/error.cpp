#include "semflow/error.hpp"

namespace semflow {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidFieldName: return "InvalidFieldName";
    case ErrorCode::InvalidSchemaName: return "InvalidSchemaName";
    case ErrorCode::DuplicateField: return "DuplicateField";
    case ErrorCode::EmptyFields: return "EmptyFields";
    case ErrorCode::EmptyDescription: return "EmptyDescription";
    case ErrorCode::PathNotFound: return "PathNotFound";
    case ErrorCode::NotADirectory: return "NotADirectory";
    case ErrorCode::EmptyDirectory: return "EmptyDirectory";
    case ErrorCode::UnknownSource: return "UnknownSource";
    case ErrorCode::EmptyPredicate: return "EmptyPredicate";
    case ErrorCode::AfterAggregate: return "AfterAggregate";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::WrongKind: return "WrongKind";
    case ErrorCode::NonPositiveLimit: return "NonPositiveLimit";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::UnknownUDF: return "UnknownUDF";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::InvalidCatalog: return "InvalidCatalog";
    case ErrorCode::NoFeasiblePlan: return "NoFeasiblePlan";
    case ErrorCode::EmptyPlanSet: return "EmptyPlanSet";
    case ErrorCode::InvalidPolicy: return "InvalidPolicy";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::AllNull: return "AllNull";
    case ErrorCode::InvalidMockRules: return "InvalidMockRules";
    case ErrorCode::DuplicateTool: return "DuplicateTool";
    case ErrorCode::UnboundTemplateVariable: return "UnboundTemplateVariable";
    case ErrorCode::MissingBinding: return "MissingBinding";
    case ErrorCode::UnparseableStep: return "UnparseableStep";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::InvalidArguments: return "InvalidArguments";
    case ErrorCode::LLMUnavailable: return "LLMUnavailable";
    case ErrorCode::NoPipeline: return "NoPipeline";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::SessionBusy: return "SessionBusy";
  }
  return "Unknown";
}

}  // namespace semflow
