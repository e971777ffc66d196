#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "askdata/catalog.hpp"
#include "askdata/engine.hpp"
#include "askdata/llm.hpp"
#include "askdata/memory.hpp"
#include "askdata/sql/parser.hpp"

namespace askdata {

struct GenerationContext {
    Dialect dialect = Dialect::Embedded;
    std::string question;
    /// Linked schema text (see linked_schema_info).
    std::string schema_info;
    /// Recall order; the kernel is never dropped before other examples.
    std::vector<RecallHit> examples;
    std::optional<std::string> kernel_id;
    /// Metric name -> formula supplied by the user.
    std::vector<std::pair<std::string, std::string>> knowledge;
    std::size_t token_budget = 3000;
};

/// "--Query1: ...\n--SQL1: \n<sql>\n" per example.
std::string format_sql_examples(const std::vector<RecallHit>& examples);

struct PreparedGeneration {
    Bindings bindings;
    std::vector<RecallHit> kept;
    std::size_t estimated_tokens = 0;
};

/// Drops the lowest-scoring non-kernel examples, then the kernel, until the
/// rendered prompt fits. Throws BudgetUnsatisfiable when no example fits.
PreparedGeneration fit_generation_budget(const GenerationContext& ctx, const PromptRegistry& registry);

/// Throws LlmMalformedOutput (after the retry) or BudgetUnsatisfiable.
std::string generate_sql(LlmGateway& llm, const GenerationContext& ctx, std::vector<RecallHit>* kept = nullptr);

std::string format_diagnostics(const std::vector<sql::SqlDiagnostic>& diagnostics);

class ReflectionFailedError : public Error {
public:
    ReflectionFailedError(const std::string& message, std::vector<sql::SqlDiagnostic> diagnostics);
    const std::vector<sql::SqlDiagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<sql::SqlDiagnostic> diagnostics_;
};

struct ReflectionOutcome {
    std::string sql;
    int rounds = 0;
    /// Diagnostics each round started from.
    std::vector<std::vector<sql::SqlDiagnostic>> history;
};

/// Repairs `sql` until it validates, at most `max_rounds` model calls.
/// Throws Internal on empty diagnostics and ReflectionFailedError when the
/// rounds run out or the model stops answering.
ReflectionOutcome reflect(LlmGateway& llm, const std::string& question, const std::string& sql,
                          const std::vector<sql::SqlDiagnostic>& diagnostics, const std::string& schema_info,
                          Dialect dialect, const Catalog& catalog, int max_rounds = 2);

/// Lineage checked against the user's grants. Unresolved columns deny. A
/// table read without naming any column (COUNT(*)) needs a grant on at least
/// one of its columns. Throws NotParsed for unparseable SQL.
AuthVerdict authorize(const std::string& user_id, const std::string& sql, Dialect dialect, const Catalog& catalog);

/// Throws ExecutionError; truncation is flagged, not fatal.
ExecutionResult execute_sql(Connection& connection, const std::string& sql, std::size_t row_limit = 1000);

}  // namespace askdata
