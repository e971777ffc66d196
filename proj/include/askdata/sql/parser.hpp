#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "askdata/sql/ast.hpp"

namespace askdata::sql {

enum class DiagnosticKind { SyntaxError, UnknownTable, UnknownColumn };

std::string_view to_string(DiagnosticKind kind);

struct SqlDiagnostic {
    DiagnosticKind kind = DiagnosticKind::SyntaxError;
    std::string detail;
    /// Offending table/column name; empty for syntax errors.
    std::string subject;
    std::optional<Span> location;

    std::string message() const;
};

/// Either a parsed statement or the syntax diagnostic explaining why not.
class ParseResult {
public:
    static ParseResult success(std::shared_ptr<const Statement> statement);
    static ParseResult failure(SqlDiagnostic diagnostic);

    bool ok() const { return statement_ != nullptr; }
    explicit operator bool() const { return ok(); }
    const Statement& statement() const { return *statement_; }
    std::shared_ptr<const Statement> shared_statement() const { return statement_; }
    const SqlDiagnostic& diagnostic() const { return diagnostic_; }

private:
    std::shared_ptr<const Statement> statement_;
    SqlDiagnostic diagnostic_;
};

/// Parses one SELECT / WITH query (or CREATE VIEW ... AS query). A trailing
/// semicolon is accepted. Never throws on bad input.
ParseResult parse(std::string_view sql, Dialect dialect);

}  // namespace askdata::sql
