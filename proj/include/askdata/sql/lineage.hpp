#pragma once

#include <string_view>
#include <vector>

#include "askdata/catalog.hpp"
#include "askdata/sql/parser.hpp"

namespace askdata::sql {

/// Tables and columns a statement reads, traced through subqueries, CTEs and
/// derived tables down to base tables.
struct Lineage {
    NameSet tables;
    ColumnSet fields;
    /// Columns whose owning table could not be determined statically
    /// (ambiguous, or referencing nothing in scope).
    NameSet unresolved_columns;

    bool operator==(const Lineage& other) const;
};

struct Analysis {
    Lineage lineage;
    /// Unknown tables / columns found while resolving names against a
    /// catalog. Empty when no catalog was supplied.
    std::vector<SqlDiagnostic> problems;
};

Analysis analyze(const Statement& statement, const Catalog* catalog);

/// Throws Error(NotParsed) when `sql` does not parse.
Lineage extract_lineage(std::string_view sql, Dialect dialect, const Catalog* catalog = nullptr);
Lineage extract_lineage(const Statement& statement, const Catalog* catalog = nullptr);

/// Empty iff the SQL parses and every referenced table and column exists in
/// `catalog`. Permissive dialects (hive/spark/flink) report only syntax and
/// unknown-table problems.
std::vector<SqlDiagnostic> validate(std::string_view sql, Dialect dialect, const Catalog& catalog);

}  // namespace askdata::sql
