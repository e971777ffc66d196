#include "askdata/sql/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace askdata::sql {

namespace {

// Words that can never be a bare column or table name. Anything else
// (month, year, name, status, type, date, ...) lexes as an identifier.
constexpr std::array kReserved = {
    "ALL",     "AND",    "AS",       "ASC",     "BETWEEN", "BY",        "CASE",      "CAST",  "CREATE",
    "CROSS",   "DESC",   "DISTINCT", "ELSE",    "END",     "EXCEPT",    "EXISTS",    "FALSE", "FROM",
    "FULL",    "GROUP",  "HAVING",   "ILIKE",   "IN",      "INNER",     "INTERSECT", "IS",    "JOIN",
    "LEFT",    "LIKE",   "LIMIT",    "NATURAL", "NOT",     "NULL",      "OFFSET",    "ON",    "OR",
    "ORDER",   "OUTER",  "RECURSIVE", "REGEXP", "RIGHT",   "RLIKE",     "SELECT",    "THEN",  "TRUE",
    "UNION",   "USING",  "VIEW",     "WHEN",    "WHERE",   "WITH",
};

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

bool backslash_escapes(Dialect d) { return d != Dialect::PostgreSql; }

}  // namespace

bool is_reserved_keyword(std::string_view upper_word) {
    return std::find(kReserved.begin(), kReserved.end(), upper_word) != kReserved.end();
}

bool tokenize(std::string_view sql, Dialect dialect, std::vector<Token>& out, LexError& error) {
    out.clear();
    const size_t n = sql.size();
    size_t i = 0;
    auto fail = [&](std::string msg, size_t begin, size_t end) {
        error = LexError{std::move(msg), Span{begin, end}};
        return false;
    };
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(sql[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        // Comments.
        if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        if (c == '#' && (dialect == Dialect::MySql || dialect == Dialect::Embedded)) {
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
            size_t close = sql.find("*/", i + 2);
            if (close == std::string_view::npos) return fail("unterminated block comment", i, n);
            i = close + 2;
            continue;
        }
        const size_t begin = i;
        // Quoted strings / identifiers.
        if (c == '\'' || c == '"' || c == '`') {
            char quote = static_cast<char>(c);
            TokenKind kind = TokenKind::String;
            if (quote == '`') {
                if (dialect == Dialect::PostgreSql) return fail("backtick quoting is not valid here", i, i + 1);
                kind = TokenKind::QuotedIdentifier;
            } else if (quote == '"' && dialect == Dialect::PostgreSql) {
                kind = TokenKind::QuotedIdentifier;
            }
            std::string text;
            ++i;
            bool closed = false;
            while (i < n) {
                char ch = sql[i];
                if (ch == quote) {
                    if (i + 1 < n && sql[i + 1] == quote) {
                        text.push_back(quote);
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                if (ch == '\\' && kind == TokenKind::String && backslash_escapes(dialect) && i + 1 < n) {
                    char e = sql[i + 1];
                    switch (e) {
                        case 'n': text.push_back('\n'); break;
                        case 't': text.push_back('\t'); break;
                        case 'r': text.push_back('\r'); break;
                        case '0': text.push_back('\0'); break;
                        default: text.push_back(e); break;
                    }
                    i += 2;
                    continue;
                }
                text.push_back(ch);
                ++i;
            }
            if (!closed) return fail("unterminated quoted text", begin, n);
            if (kind == TokenKind::QuotedIdentifier && text.empty()) return fail("empty quoted identifier", begin, i);
            out.push_back(Token{kind, std::move(text), Span{begin, i}});
            continue;
        }
        // Numbers (a leading '.' followed by a digit counts too).
        if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
            if (i < n && sql[i] == '.') {
                ++i;
                while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
            }
            if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
                size_t j = i + 1;
                if (j < n && (sql[j] == '+' || sql[j] == '-')) ++j;
                if (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) {
                    i = j;
                    while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                }
            }
            if (i < n && is_ident_start(static_cast<unsigned char>(sql[i]))) {
                // 1abc style garbage.
                while (i < n && is_ident_char(static_cast<unsigned char>(sql[i]))) ++i;
                return fail("malformed number", begin, i);
            }
            out.push_back(Token{TokenKind::Number, std::string(sql.substr(begin, i - begin)), Span{begin, i}});
            continue;
        }
        if (is_ident_start(c)) {
            while (i < n && is_ident_char(static_cast<unsigned char>(sql[i]))) ++i;
            std::string word(sql.substr(begin, i - begin));
            std::string upper = to_upper(word);
            if (is_reserved_keyword(upper)) {
                out.push_back(Token{TokenKind::Keyword, std::move(upper), Span{begin, i}});
            } else {
                out.push_back(Token{TokenKind::Identifier, std::move(word), Span{begin, i}});
            }
            continue;
        }
        // Multi-character operators first.
        static constexpr std::array kOps2 = {"<>", "!=", "<=", ">=", "||", "::", "=="};
        if (i + 1 < n) {
            std::string_view two = sql.substr(i, 2);
            if (std::find(kOps2.begin(), kOps2.end(), two) != kOps2.end()) {
                if (two == "::" && dialect != Dialect::PostgreSql) return fail("'::' cast is postgresql-only", i, i + 2);
                out.push_back(Token{TokenKind::Operator, std::string(two == "==" ? "=" : two), Span{i, i + 2}});
                i += 2;
                continue;
            }
        }
        switch (c) {
            case '=': case '<': case '>': case '+': case '-': case '*': case '/': case '%':
                out.push_back(Token{TokenKind::Operator, std::string(1, static_cast<char>(c)), Span{i, i + 1}});
                ++i;
                continue;
            case '(': case ')': case ',': case '.': case ';': case '[': case ']':
                out.push_back(Token{TokenKind::Punct, std::string(1, static_cast<char>(c)), Span{i, i + 1}});
                ++i;
                continue;
            default:
                return fail(std::string("unexpected character '") + static_cast<char>(c) + "'", i, i + 1);
        }
    }
    out.push_back(Token{TokenKind::End, {}, Span{n, n}});
    return true;
}

std::vector<std::string> split_statements(std::string_view script, Dialect dialect) {
    std::vector<std::string> out;
    std::vector<Token> tokens;
    LexError err;
    if (!tokenize(script, dialect, tokens, err)) {
        std::string whole = trim(script);
        if (!whole.empty()) out.push_back(whole);
        return out;
    }
    size_t start = 0;
    bool has_tokens = false;
    for (const auto& t : tokens) {
        if (t.kind == TokenKind::End || t.is_punct(';')) {
            size_t end = t.kind == TokenKind::End ? script.size() : t.span.begin;
            std::string stmt = trim(script.substr(start, end - start));
            if (has_tokens && !stmt.empty()) out.push_back(std::move(stmt));
            start = t.span.end;
            has_tokens = false;
        } else {
            has_tokens = true;
        }
    }
    return out;
}

}  // namespace askdata::sql
