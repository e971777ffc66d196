#include "askdata/sql/parser.hpp"

#include <array>
#include <utility>

namespace askdata::sql {

std::string_view to_string(DiagnosticKind kind) {
    switch (kind) {
        case DiagnosticKind::SyntaxError: return "SyntaxError";
        case DiagnosticKind::UnknownTable: return "UnknownTable";
        case DiagnosticKind::UnknownColumn: return "UnknownColumn";
    }
    return "SyntaxError";
}

std::string SqlDiagnostic::message() const { return std::string(to_string(kind)) + ": " + detail; }

ParseResult ParseResult::success(std::shared_ptr<const Statement> statement) {
    ParseResult r;
    r.statement_ = std::move(statement);
    return r;
}

ParseResult ParseResult::failure(SqlDiagnostic diagnostic) {
    ParseResult r;
    r.diagnostic_ = std::move(diagnostic);
    return r;
}

namespace {

constexpr int kMaxDepth = 200;

struct ParseError {
    std::string message;
    Span span;
};

// Niladic functions usable without parentheses.
constexpr std::array kNiladic = {"CURRENT_DATE", "CURRENT_TIME", "CURRENT_TIMESTAMP", "LOCALTIME", "LOCALTIMESTAMP"};

bool is_niladic(std::string_view word) {
    std::string upper = to_upper(word);
    for (auto n : kNiladic) {
        if (upper == n) return true;
    }
    return false;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, Dialect dialect) : tokens_(std::move(tokens)), dialect_(dialect) {}

    Statement parse_statement() {
        Statement stmt;
        if (peek().is_keyword("CREATE")) {
            advance();
            if (peek().is_keyword("OR")) {
                advance();
                expect_word("REPLACE");
            }
            expect_keyword("VIEW");
            stmt.kind = Statement::Kind::CreateView;
            stmt.view_name = parse_qualified_name();
            expect_keyword("AS");
        }
        if (!peek().is_keyword("SELECT") && !peek().is_keyword("WITH") && !peek().is_punct('(')) {
            fail(peek().kind == TokenKind::End ? "empty statement" : "expected SELECT or WITH");
        }
        stmt.query = parse_query();
        while (peek().is_punct(';')) advance();
        if (peek().kind != TokenKind::End) fail("unexpected trailing input");
        return stmt;
    }

private:
    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    const Token& advance() {
        const Token& t = tokens_[pos_];
        if (pos_ + 1 < tokens_.size()) ++pos_;
        return t;
    }
    [[noreturn]] void fail(std::string message) const {
        const Token& t = peek();
        std::string where = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
        throw ParseError{message + " near " + where, t.span};
    }
    bool accept_keyword(std::string_view kw) {
        if (peek().is_keyword(kw)) {
            advance();
            return true;
        }
        return false;
    }
    void expect_keyword(std::string_view kw) {
        if (!accept_keyword(kw)) fail("expected " + std::string(kw));
    }
    bool accept_punct(char c) {
        if (peek().is_punct(c)) {
            advance();
            return true;
        }
        return false;
    }
    void expect_punct(char c) {
        if (!accept_punct(c)) fail(std::string("expected '") + c + "'");
    }
    bool peek_word(std::string_view word, size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Identifier && iequals(t.text, word);
    }
    void expect_word(std::string_view word) {
        if (!peek_word(word)) fail("expected " + std::string(word));
        advance();
    }
    bool is_name(const Token& t) const {
        return t.kind == TokenKind::Identifier || t.kind == TokenKind::QuotedIdentifier;
    }
    std::string expect_name() {
        if (!is_name(peek())) fail("expected identifier");
        return advance().text;
    }
    std::string parse_qualified_name() {
        std::string name = expect_name();
        while (peek().is_punct('.') && is_name(peek(1))) {
            advance();
            name += "." + advance().text;
        }
        return name;
    }

    struct DepthGuard {
        explicit DepthGuard(Parser& p) : p_(p) {
            if (++p_.depth_ > kMaxDepth) p_.fail("nesting too deep");
        }
        ~DepthGuard() { --p_.depth_; }
        Parser& p_;
    };

    // ---- queries -------------------------------------------------------

    QueryPtr parse_query() {
        DepthGuard guard(*this);
        auto q = std::make_unique<Query>();
        if (accept_keyword("WITH")) {
            q->recursive = accept_keyword("RECURSIVE");
            do {
                Cte cte;
                cte.name = expect_name();
                if (accept_punct('(')) {
                    do {
                        cte.columns.push_back(expect_name());
                    } while (accept_punct(','));
                    expect_punct(')');
                }
                expect_keyword("AS");
                expect_punct('(');
                cte.query = parse_query();
                expect_punct(')');
                q->ctes.push_back(std::move(cte));
            } while (accept_punct(','));
        }
        q->first = parse_term();
        while (true) {
            SetOp op;
            if (accept_keyword("UNION")) {
                op = accept_keyword("ALL") ? SetOp::UnionAll : SetOp::Union;
                if (op == SetOp::Union) accept_keyword("DISTINCT");
            } else if (accept_keyword("INTERSECT")) {
                op = SetOp::Intersect;
            } else if (accept_keyword("EXCEPT")) {
                op = SetOp::Except;
            } else {
                break;
            }
            q->rest.emplace_back(op, parse_term());
        }
        if (accept_keyword("ORDER")) {
            expect_keyword("BY");
            q->order_by = parse_order_list();
        }
        if (accept_keyword("LIMIT")) {
            ExprPtr first = parse_expr();
            if (accept_punct(',')) {
                // MySQL: LIMIT offset, count
                q->offset = std::move(first);
                q->limit = parse_expr();
            } else {
                q->limit = std::move(first);
            }
        }
        if (accept_keyword("OFFSET")) {
            if (q->offset) fail("duplicate OFFSET");
            q->offset = parse_expr();
        }
        return q;
    }

    QueryTerm parse_term() {
        QueryTerm term;
        if (peek().is_punct('(')) {
            advance();
            term.nested = parse_query();
            expect_punct(')');
            return term;
        }
        term.select = parse_select_core();
        return term;
    }

    std::vector<OrderItem> parse_order_list() {
        std::vector<OrderItem> items;
        do {
            OrderItem item;
            item.expr = parse_expr();
            if (accept_keyword("DESC")) {
                item.descending = true;
            } else {
                accept_keyword("ASC");
            }
            if (peek_word("NULLS")) {
                advance();
                if (peek_word("FIRST") || peek_word("LAST")) {
                    advance();
                } else {
                    fail("expected FIRST or LAST");
                }
            }
            items.push_back(std::move(item));
        } while (accept_punct(','));
        return items;
    }

    std::unique_ptr<SelectCore> parse_select_core() {
        expect_keyword("SELECT");
        auto core = std::make_unique<SelectCore>();
        if (accept_keyword("DISTINCT")) {
            core->distinct = true;
        } else {
            accept_keyword("ALL");
        }
        do {
            core->items.push_back(parse_select_item());
        } while (accept_punct(','));
        if (accept_keyword("FROM")) {
            do {
                core->from.push_back(parse_table_ref());
            } while (accept_punct(','));
        }
        if (accept_keyword("WHERE")) core->where = parse_expr();
        if (accept_keyword("GROUP")) {
            expect_keyword("BY");
            do {
                core->group_by.push_back(parse_expr());
            } while (accept_punct(','));
        }
        if (accept_keyword("HAVING")) core->having = parse_expr();
        return core;
    }

    SelectItem parse_select_item() {
        SelectItem item;
        if (peek().is_operator("*")) {
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::Star;
            e->span = advance().span;
            item.expr = std::move(e);
            return item;
        }
        item.expr = parse_expr();
        item.alias = parse_optional_alias(/*allow_string=*/true);
        return item;
    }

    std::string parse_optional_alias(bool allow_string) {
        if (accept_keyword("AS")) {
            if (allow_string && peek().kind == TokenKind::String) return advance().text;
            return expect_name();
        }
        if (is_name(peek())) return advance().text;
        if (allow_string && peek().kind == TokenKind::String) return advance().text;
        return {};
    }

    // ---- FROM ----------------------------------------------------------

    TableRefPtr parse_table_ref() {
        DepthGuard guard(*this);
        TableRefPtr left = parse_table_primary();
        while (true) {
            size_t start = peek().span.begin;
            bool natural = accept_keyword("NATURAL");
            JoinType type = JoinType::Inner;
            if (accept_keyword("JOIN")) {
                type = JoinType::Inner;
            } else if (accept_keyword("INNER")) {
                expect_keyword("JOIN");
            } else if (accept_keyword("LEFT")) {
                accept_keyword("OUTER");
                expect_keyword("JOIN");
                type = JoinType::Left;
            } else if (accept_keyword("RIGHT")) {
                accept_keyword("OUTER");
                expect_keyword("JOIN");
                type = JoinType::Right;
            } else if (accept_keyword("FULL")) {
                accept_keyword("OUTER");
                expect_keyword("JOIN");
                type = JoinType::Full;
            } else if (accept_keyword("CROSS")) {
                expect_keyword("JOIN");
                type = JoinType::Cross;
            } else {
                if (natural) fail("expected JOIN");
                break;
            }
            auto join = std::make_unique<TableRef>();
            join->kind = TableRef::Kind::Join;
            join->join = type;
            join->natural = natural;
            join->left = std::move(left);
            join->right = parse_table_primary();
            if (!natural && type != JoinType::Cross) {
                if (accept_keyword("ON")) {
                    join->on = parse_expr();
                } else if (accept_keyword("USING")) {
                    expect_punct('(');
                    do {
                        join->using_columns.push_back(expect_name());
                    } while (accept_punct(','));
                    expect_punct(')');
                }
            }
            join->span = Span{start, peek().span.begin};
            left = std::move(join);
        }
        return left;
    }

    TableRefPtr parse_table_primary() {
        auto ref = std::make_unique<TableRef>();
        ref->span.begin = peek().span.begin;
        if (accept_punct('(')) {
            if (peek().is_keyword("SELECT") || peek().is_keyword("WITH") || peek().is_punct('(')) {
                // Could be a derived table or a parenthesized join; a
                // leading '(' is resolved as a query first.
                ref->kind = TableRef::Kind::Derived;
                ref->subquery = parse_query();
                expect_punct(')');
                ref->alias = parse_optional_alias(false);
            } else {
                TableRefPtr inner = parse_table_ref();
                expect_punct(')');
                return inner;
            }
        } else {
            ref->kind = TableRef::Kind::Base;
            ref->name = parse_qualified_name();
            ref->alias = parse_optional_alias(false);
        }
        ref->span.end = peek().span.begin;
        return ref;
    }

    // ---- expressions ---------------------------------------------------

    ExprPtr make(ExprKind kind, Span span) {
        auto e = std::make_unique<Expr>();
        e->kind = kind;
        e->span = span;
        return e;
    }

    ExprPtr binary(std::string op, ExprPtr l, ExprPtr r) {
        Span span{l->span.begin, r->span.end};
        auto e = make(ExprKind::Binary, span);
        e->op = std::move(op);
        e->args.push_back(std::move(l));
        e->args.push_back(std::move(r));
        return e;
    }

    ExprPtr parse_expr() {
        DepthGuard guard(*this);
        return parse_or();
    }

    ExprPtr parse_or() {
        ExprPtr left = parse_and();
        while (accept_keyword("OR")) left = binary("OR", std::move(left), parse_and());
        return left;
    }

    ExprPtr parse_and() {
        ExprPtr left = parse_not();
        while (accept_keyword("AND")) left = binary("AND", std::move(left), parse_not());
        return left;
    }

    ExprPtr parse_not() {
        if (peek().is_keyword("NOT") && !peek(1).is_keyword("EXISTS")) {
            Span s = advance().span;
            DepthGuard guard(*this);
            ExprPtr operand = parse_not();
            auto e = make(ExprKind::Unary, Span{s.begin, operand->span.end});
            e->op = "NOT";
            e->args.push_back(std::move(operand));
            return e;
        }
        return parse_predicate();
    }

    ExprPtr parse_predicate() {
        ExprPtr left = parse_concat();
        while (true) {
            const Token& t = peek();
            if (t.kind == TokenKind::Operator &&
                (t.text == "=" || t.text == "<>" || t.text == "!=" || t.text == "<" || t.text == "<=" ||
                 t.text == ">" || t.text == ">=")) {
                std::string op = advance().text;
                if (op == "!=") op = "<>";
                left = binary(op, std::move(left), parse_concat());
                continue;
            }
            if (t.is_keyword("IS")) {
                advance();
                bool negated = accept_keyword("NOT");
                expect_keyword("NULL");
                auto e = make(ExprKind::IsNull, Span{left->span.begin, peek().span.begin});
                e->negated = negated;
                e->args.push_back(std::move(left));
                left = std::move(e);
                continue;
            }
            bool negated = false;
            if (t.is_keyword("NOT") &&
                (peek(1).is_keyword("BETWEEN") || peek(1).is_keyword("IN") || peek(1).is_keyword("LIKE") ||
                 peek(1).is_keyword("ILIKE") || peek(1).is_keyword("REGEXP") || peek(1).is_keyword("RLIKE"))) {
                advance();
                negated = true;
            }
            if (accept_keyword("BETWEEN")) {
                ExprPtr low = parse_concat();
                expect_keyword("AND");
                ExprPtr high = parse_concat();
                auto e = make(ExprKind::Between, Span{left->span.begin, high->span.end});
                e->negated = negated;
                e->args.push_back(std::move(left));
                e->args.push_back(std::move(low));
                e->args.push_back(std::move(high));
                left = std::move(e);
                continue;
            }
            if (accept_keyword("IN")) {
                expect_punct('(');
                if (peek().is_keyword("SELECT") || peek().is_keyword("WITH")) {
                    auto e = make(ExprKind::InSubquery, Span{left->span.begin, 0});
                    e->negated = negated;
                    e->args.push_back(std::move(left));
                    e->subquery = parse_query();
                    expect_punct(')');
                    e->span.end = peek().span.begin;
                    left = std::move(e);
                } else {
                    auto e = make(ExprKind::InList, Span{left->span.begin, 0});
                    e->negated = negated;
                    e->args.push_back(std::move(left));
                    do {
                        e->args.push_back(parse_expr());
                    } while (accept_punct(','));
                    expect_punct(')');
                    e->span.end = peek().span.begin;
                    left = std::move(e);
                }
                continue;
            }
            if (peek().is_keyword("LIKE") || peek().is_keyword("ILIKE") || peek().is_keyword("REGEXP") ||
                peek().is_keyword("RLIKE")) {
                std::string op = advance().text;
                ExprPtr pattern = parse_concat();
                auto e = make(ExprKind::Like, Span{left->span.begin, pattern->span.end});
                e->op = op;
                e->negated = negated;
                e->args.push_back(std::move(left));
                e->args.push_back(std::move(pattern));
                left = std::move(e);
                continue;
            }
            if (negated) fail("expected BETWEEN, IN or LIKE after NOT");
            break;
        }
        return left;
    }

    ExprPtr parse_concat() {
        ExprPtr left = parse_additive();
        while (peek().is_operator("||")) {
            advance();
            left = binary("||", std::move(left), parse_additive());
        }
        return left;
    }

    ExprPtr parse_additive() {
        ExprPtr left = parse_multiplicative();
        while (peek().is_operator("+") || peek().is_operator("-")) {
            std::string op = advance().text;
            left = binary(op, std::move(left), parse_multiplicative());
        }
        return left;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr left = parse_unary();
        while (peek().is_operator("*") || peek().is_operator("/") || peek().is_operator("%")) {
            std::string op = advance().text;
            left = binary(op, std::move(left), parse_unary());
        }
        return left;
    }

    ExprPtr parse_unary() {
        if (peek().is_operator("-") || peek().is_operator("+")) {
            Span s = peek().span;
            std::string op = advance().text;
            DepthGuard guard(*this);
            ExprPtr operand = parse_unary();
            auto e = make(ExprKind::Unary, Span{s.begin, operand->span.end});
            e->op = op;
            e->args.push_back(std::move(operand));
            return e;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_primary();
        while (true) {
            if (peek().is_punct('[')) {
                advance();
                ExprPtr index = parse_expr();
                expect_punct(']');
                auto sub = make(ExprKind::Subscript, Span{e->span.begin, peek().span.begin});
                sub->args.push_back(std::move(e));
                sub->args.push_back(std::move(index));
                e = std::move(sub);
                continue;
            }
            if (peek().is_operator("::")) {
                advance();
                auto cast = make(ExprKind::Cast, Span{e->span.begin, 0});
                cast->name = parse_type_name();
                cast->args.push_back(std::move(e));
                cast->span.end = peek().span.begin;
                e = std::move(cast);
                continue;
            }
            break;
        }
        return e;
    }

    std::string parse_type_name() {
        std::string type = to_upper(expect_name());
        while (peek().kind == TokenKind::Identifier) type += " " + to_upper(advance().text);
        if (accept_punct('(')) {
            type += "(";
            bool first = true;
            do {
                if (!first) type += ",";
                first = false;
                if (peek().kind != TokenKind::Number) fail("expected type length");
                type += advance().text;
            } while (accept_punct(','));
            expect_punct(')');
            type += ")";
        }
        return type;
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::Number: {
                auto e = make(ExprKind::Literal, t.span);
                e->literal = LiteralKind::Number;
                e->op = advance().text;
                return e;
            }
            case TokenKind::String: {
                auto e = make(ExprKind::Literal, t.span);
                e->literal = LiteralKind::String;
                e->op = advance().text;
                return e;
            }
            case TokenKind::Keyword: return parse_keyword_primary();
            case TokenKind::Identifier:
            case TokenKind::QuotedIdentifier: return parse_name_primary();
            case TokenKind::Punct:
                if (t.is_punct('(')) {
                    Span s = advance().span;
                    if (peek().is_keyword("SELECT") || peek().is_keyword("WITH")) {
                        auto e = make(ExprKind::Subquery, s);
                        e->subquery = parse_query();
                        expect_punct(')');
                        e->span.end = peek().span.begin;
                        return e;
                    }
                    ExprPtr inner = parse_expr();
                    expect_punct(')');
                    return inner;
                }
                break;
            default: break;
        }
        fail("expected expression");
    }

    ExprPtr parse_keyword_primary() {
        const Token& t = peek();
        if (t.is_keyword("NULL")) {
            auto e = make(ExprKind::Literal, advance().span);
            e->literal = LiteralKind::Null;
            e->op = "NULL";
            return e;
        }
        if (t.is_keyword("TRUE") || t.is_keyword("FALSE")) {
            auto e = make(ExprKind::Literal, t.span);
            e->literal = LiteralKind::Boolean;
            e->op = advance().text;
            return e;
        }
        if (t.is_keyword("CASE")) return parse_case();
        if (t.is_keyword("CAST")) {
            Span s = advance().span;
            expect_punct('(');
            auto e = make(ExprKind::Cast, s);
            e->args.push_back(parse_expr());
            expect_keyword("AS");
            e->name = parse_type_name();
            expect_punct(')');
            e->span.end = peek().span.begin;
            return e;
        }
        if (t.is_keyword("NOT") || t.is_keyword("EXISTS")) {
            Span s = t.span;
            bool negated = accept_keyword("NOT");
            expect_keyword("EXISTS");
            expect_punct('(');
            auto e = make(ExprKind::Exists, s);
            e->negated = negated;
            e->subquery = parse_query();
            expect_punct(')');
            e->span.end = peek().span.begin;
            return e;
        }
        // LEFT(...) / RIGHT(...) string functions.
        if ((t.is_keyword("LEFT") || t.is_keyword("RIGHT")) && peek(1).is_punct('(')) {
            std::string name = advance().text;
            return parse_function_call(std::move(name), t.span);
        }
        fail("unexpected keyword");
    }

    ExprPtr parse_case() {
        Span s = advance().span;
        auto e = make(ExprKind::Case, s);
        if (!peek().is_keyword("WHEN")) e->case_operand = parse_expr();
        if (!peek().is_keyword("WHEN")) fail("expected WHEN");
        while (accept_keyword("WHEN")) {
            e->args.push_back(parse_expr());
            expect_keyword("THEN");
            e->args.push_back(parse_expr());
        }
        if (accept_keyword("ELSE")) e->else_expr = parse_expr();
        expect_keyword("END");
        e->span.end = peek().span.begin;
        return e;
    }

    ExprPtr parse_name_primary() {
        const Token& t = peek();
        Span s = t.span;
        bool quoted = t.kind == TokenKind::QuotedIdentifier;
        std::string first = advance().text;
        if (!quoted && peek().is_punct('(')) return parse_function_call(std::move(first), s);
        if (!quoted && iequals(first, "INTERVAL") &&
            (peek().kind == TokenKind::Number || peek().kind == TokenKind::String || peek().is_operator("-"))) {
            auto e = make(ExprKind::Function, s);
            e->op = "INTERVAL";
            e->args.push_back(parse_additive());
            auto unit = make(ExprKind::Literal, peek().span);
            unit->literal = LiteralKind::String;
            unit->op = to_upper(expect_name());
            e->args.push_back(std::move(unit));
            e->span.end = peek().span.begin;
            return e;
        }
        if (!quoted && is_niladic(first) && !peek().is_punct('.')) {
            auto e = make(ExprKind::Function, s);
            e->op = to_upper(first);
            e->name = "niladic";
            return e;
        }
        std::vector<std::string> parts{first};
        while (peek().is_punct('.')) {
            advance();
            if (peek().is_operator("*")) {
                Span star = advance().span;
                auto e = make(ExprKind::Star, Span{s.begin, star.end});
                e->qualifier = join(parts, ".");
                return e;
            }
            parts.push_back(expect_name());
        }
        auto e = make(ExprKind::Column, Span{s.begin, peek(0).span.begin});
        e->name = parts.back();
        parts.pop_back();
        e->qualifier = join(parts, ".");
        e->span.end = tokens_[pos_ > 0 ? pos_ - 1 : 0].span.end;
        return e;
    }

    ExprPtr parse_function_call(std::string name, Span s) {
        expect_punct('(');
        auto e = make(ExprKind::Function, s);
        e->op = std::move(name);
        if (!peek().is_punct(')')) {
            if (accept_keyword("DISTINCT")) {
                e->distinct = true;
            } else {
                accept_keyword("ALL");
            }
            if (peek().is_operator("*")) {
                auto star = make(ExprKind::Star, advance().span);
                e->args.push_back(std::move(star));
            } else {
                do {
                    e->args.push_back(parse_expr());
                } while (accept_punct(','));
            }
        }
        expect_punct(')');
        if (peek_word("OVER") && peek(1).is_punct('(')) {
            advance();
            advance();
            e->windowed = true;
            if (peek_word("PARTITION")) {
                advance();
                expect_keyword("BY");
                do {
                    e->partition_by.push_back(parse_expr());
                } while (accept_punct(','));
            }
            if (accept_keyword("ORDER")) {
                expect_keyword("BY");
                e->window_order = parse_order_list();
            }
            expect_punct(')');
        }
        e->span.end = tokens_[pos_ > 0 ? pos_ - 1 : 0].span.end;
        return e;
    }

    std::vector<Token> tokens_;
    Dialect dialect_;
    size_t pos_ = 0;
    int depth_ = 0;
};

}  // namespace

ParseResult parse(std::string_view sql, Dialect dialect) {
    std::vector<Token> tokens;
    LexError lex_error;
    if (!tokenize(sql, dialect, tokens, lex_error)) {
        return ParseResult::failure(
            SqlDiagnostic{DiagnosticKind::SyntaxError, lex_error.message, {}, lex_error.span});
    }
    try {
        Parser parser(std::move(tokens), dialect);
        auto stmt = std::make_shared<Statement>(parser.parse_statement());
        return ParseResult::success(std::move(stmt));
    } catch (const ParseError& e) {
        return ParseResult::failure(SqlDiagnostic{DiagnosticKind::SyntaxError, e.message, {}, e.span});
    }
}

}  // namespace askdata::sql
