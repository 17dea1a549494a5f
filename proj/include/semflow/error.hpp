#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semflow {

enum class ErrorCode {
  // schema
  LengthMismatch,
  InvalidFieldName,
  InvalidSchemaName,
  DuplicateField,
  EmptyFields,
  EmptyDescription,
  // datasets
  PathNotFound,
  NotADirectory,
  EmptyDirectory,
  UnknownSource,
  // logical plans
  EmptyPredicate,
  AfterAggregate,
  UnknownField,
  WrongKind,
  NonPositiveLimit,
  InvalidPlan,
  // physical plans
  UnknownUDF,
  UnknownModel,
  InvalidCatalog,
  // optimizer
  NoFeasiblePlan,
  EmptyPlanSet,
  InvalidPolicy,
  // execution
  ProviderUnavailable,
  AllNull,
  InvalidMockRules,
  // agent
  DuplicateTool,
  UnboundTemplateVariable,
  MissingBinding,
  UnparseableStep,
  UnknownTool,
  InvalidArguments,
  LLMUnavailable,
  NoPipeline,
  // files
  ParseError,
  IoError,
  UnknownSession,
  SessionBusy,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure the engine reports carries one of the codes above so that
/// callers (CLI exit codes, HTTP status mapping, agent observations) can
/// branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace semflow
