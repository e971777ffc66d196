#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "askdata/catalog.hpp"

namespace askdata::sql {

/// Byte range into the original SQL text.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
};

enum class TokenKind {
    Identifier,        // bare word that is not a reserved keyword
    QuotedIdentifier,  // `x` everywhere except postgresql, "x" in postgresql
    Keyword,           // reserved word; text is upper-cased
    String,            // text holds the unescaped contents
    Number,
    Operator,          // = <> != < <= > >= || + - * / % ::
    Punct,             // ( ) , . ; [ ]
    End,
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    Span span;

    bool is_keyword(std::string_view kw) const { return kind == TokenKind::Keyword && text == kw; }
    bool is_punct(char c) const { return kind == TokenKind::Punct && text.size() == 1 && text[0] == c; }
    bool is_operator(std::string_view op) const { return kind == TokenKind::Operator && text == op; }
};

struct LexError {
    std::string message;
    Span span;
};

bool is_reserved_keyword(std::string_view upper_word);

/// Tokenizes `sql` for `dialect`; comments and whitespace are dropped. On a
/// malformed token (unterminated string/comment, stray character) returns
/// false and fills `error`.
bool tokenize(std::string_view sql, Dialect dialect, std::vector<Token>& out, LexError& error);

/// Splits a script into statements at top-level semicolons. Returns the raw
/// text of each non-empty statement (without the semicolon).
std::vector<std::string> split_statements(std::string_view script, Dialect dialect);

}  // namespace askdata::sql
