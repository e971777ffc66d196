#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "askdata/sql/ast.hpp"

namespace askdata::sql {

/// Canonical text of a statement, used for exact-match comparison.
///
/// Normalizes keyword and identifier case, whitespace, comments, literal
/// spelling, grouping parentheses, optional keywords (AS, ASC, INNER, OUTER),
/// `!=` vs `<>`, and cosmetic aliases: table aliases of tables that occur
/// once in a FROM clause, qualifiers in single-table scopes, and column
/// aliases of the outermost select list (references to them in ORDER BY /
/// GROUP BY / HAVING are replaced by the aliased expression).
std::string canonical_form(const Statement& statement);

/// nullopt when the SQL does not parse.
std::optional<std::string> canonical_form(std::string_view sql, Dialect dialect);

}  // namespace askdata::sql
