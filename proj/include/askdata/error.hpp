#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace askdata {

enum class ErrorKind {
    InvalidArgument,
    DuplicateField,
    EmptyDescription,
    UnknownDialect,
    UnknownDomain,
    UnknownTable,
    NotParsed,
    DimensionMismatch,
    ProviderUnavailable,
    Timeout,
    LlmMalformedOutput,
    MissingBinding,
    NoFence,
    BudgetUnsatisfiable,
    ReflectionFailed,
    ExecutionError,
    NotConfigured,
    ChartInvalid,
    AxisInvalid,
    SeriesTooShort,
    GoldExecutionFailed,
    NotFound,
    Busy,
    Forbidden,
    Io,
    Internal,
};

std::string_view to_string(ErrorKind kind);

/// Every failure surfaced by the library carries one of the kinds above so
/// callers (pipeline stages, HTTP handlers) can map it without parsing text.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace askdata
