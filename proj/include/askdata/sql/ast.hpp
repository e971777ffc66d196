#pragma once

#include <memory>
#include <string>
#include <vector>

#include "askdata/sql/lexer.hpp"

namespace askdata::sql {

struct Query;
struct Expr;
struct TableRef;
using QueryPtr = std::unique_ptr<Query>;
using ExprPtr = std::unique_ptr<Expr>;
using TableRefPtr = std::unique_ptr<TableRef>;

enum class ExprKind {
    Literal,
    Column,      // [qualifier.]name
    Star,        // * or qualifier.*
    Unary,       // op: "-", "+", "NOT"
    Binary,      // op: AND OR = <> < <= > >= + - * / % ||
    Function,    // name(args), DISTINCT flag for aggregates
    Case,        // [operand] WHEN .. THEN .. [ELSE]
    Cast,        // CAST(x AS type) / x::type; type in `name`
    InList,      // args[0] [NOT] IN (args[1..])
    InSubquery,  // args[0] [NOT] IN (subquery)
    Between,     // args[0] [NOT] BETWEEN args[1] AND args[2]
    Like,        // args[0] [NOT] op args[1]; op: LIKE ILIKE REGEXP RLIKE
    IsNull,      // args[0] IS [NOT] NULL
    Exists,      // [NOT] EXISTS (subquery)
    Subquery,    // scalar (subquery)
    Subscript,   // args[0][args[1]]
};

enum class LiteralKind { Number, String, Null, Boolean };

struct OrderItem {
    ExprPtr expr;
    bool descending = false;
};

struct Expr {
    ExprKind kind = ExprKind::Literal;
    LiteralKind literal = LiteralKind::Number;
    /// Literal text, operator, or function name (as written).
    std::string op;
    std::string qualifier;
    /// Column name, or the target type of a cast.
    std::string name;
    bool negated = false;
    bool distinct = false;
    std::vector<ExprPtr> args;
    /// CASE: optional operand, WHEN/THEN pairs in `args`, optional ELSE.
    ExprPtr case_operand;
    ExprPtr else_expr;
    QueryPtr subquery;
    /// Window: f(...) OVER (PARTITION BY .. ORDER BY ..).
    bool windowed = false;
    std::vector<ExprPtr> partition_by;
    std::vector<OrderItem> window_order;
    Span span;
};

struct SelectItem {
    ExprPtr expr;
    std::string alias;
};

enum class JoinType { Inner, Left, Right, Full, Cross, Comma };

struct TableRef {
    enum class Kind { Base, Derived, Join };
    Kind kind = Kind::Base;
    /// Base: table name as written, possibly "db.table".
    std::string name;
    std::string alias;
    QueryPtr subquery;
    JoinType join = JoinType::Inner;
    bool natural = false;
    TableRefPtr left;
    TableRefPtr right;
    ExprPtr on;
    std::vector<std::string> using_columns;
    Span span;
};

struct SelectCore {
    bool distinct = false;
    std::vector<SelectItem> items;
    std::vector<TableRefPtr> from;
    ExprPtr where;
    std::vector<ExprPtr> group_by;
    ExprPtr having;
};

enum class SetOp { Union, UnionAll, Intersect, Except };

/// One operand of a set operation: a plain SELECT or a parenthesized query.
struct QueryTerm {
    std::unique_ptr<SelectCore> select;
    QueryPtr nested;
};

struct Cte {
    std::string name;
    std::vector<std::string> columns;
    QueryPtr query;
};

struct Query {
    bool recursive = false;
    std::vector<Cte> ctes;
    QueryTerm first;
    std::vector<std::pair<SetOp, QueryTerm>> rest;
    std::vector<OrderItem> order_by;
    ExprPtr limit;
    ExprPtr offset;
};

struct Statement {
    enum class Kind { Select, CreateView };
    Kind kind = Kind::Select;
    std::string view_name;
    QueryPtr query;
};

}  // namespace askdata::sql
