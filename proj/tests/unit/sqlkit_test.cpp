#include <gtest/gtest.h>

#include <random>

#include "askdata/engine.hpp"
#include "askdata/error.hpp"
#include "askdata/sql/lexer.hpp"
#include "askdata/sql/lineage.hpp"
#include "askdata/sql/parser.hpp"
#include "fixtures.hpp"
#include "lineage_corpus.hpp"

namespace askdata::sql {
namespace {

using askdata::testing::fixture_catalog;
using askdata::testing::lineage_corpus;
using askdata::testing::LineageCase;

constexpr auto E = Dialect::Embedded;

const Catalog& catalog() {
    static const Catalog c = fixture_catalog();
    return c;
}

Lineage expected_of(const LineageCase& lc) {
    Lineage l;
    l.tables.insert(lc.tables.begin(), lc.tables.end());
    for (const auto& [t, c] : lc.fields) l.fields.insert({t, c});
    l.unresolved_columns.insert(lc.unresolved.begin(), lc.unresolved.end());
    return l;
}

std::string describe(const Lineage& l) {
    std::string out = "tables:";
    for (const auto& t : l.tables) out += " " + t;
    out += "\nfields:";
    for (const auto& f : l.fields) out += " " + f.table + "." + f.column;
    out += "\nunresolved:";
    for (const auto& u : l.unresolved_columns) out += " " + u;
    return out;
}

// Inserts comments and line breaks between tokens outside of quotes.
std::string reformat(const std::string& sql) {
    std::string out;
    char quote = 0;
    bool line_comment = false, block_comment = false;
    for (size_t i = 0; i < sql.size(); ++i) {
        char ch = sql[i];
        char next = i + 1 < sql.size() ? sql[i + 1] : 0;
        if (line_comment || block_comment) {
            out += ch;
            if (line_comment && ch == '\n') line_comment = false;
            if (block_comment && ch == '*' && next == '/') {
                out += next;
                ++i;
                block_comment = false;
            }
            continue;
        }
        if (!quote && ((ch == '-' && next == '-') || ch == '#')) line_comment = true;
        if (!quote && ch == '/' && next == '*') block_comment = true;
        if (quote) {
            out += ch;
            if (ch == quote) quote = 0;
            continue;
        }
        if (ch == '\'' || ch == '"' || ch == '`') quote = ch;
        if (ch == ' ') {
            out += "\n   /* x */  ";
        } else {
            out += ch;
        }
    }
    return out + "\n-- trailing\n";
}

TEST(Parse, AcceptsGoldQuery) {
    auto r = parse(askdata::testing::kGradeCountGold, E);
    ASSERT_TRUE(r.ok()) << r.diagnostic().message();
    EXPECT_EQ(r.statement().kind, Statement::Kind::Select);
}

TEST(Parse, RejectsTypo) {
    auto r = parse("SELEC 1", E);
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.diagnostic().kind, DiagnosticKind::SyntaxError);
}

TEST(Parse, RejectsEmptyStatement) {
    for (const char* sql : {"", "   ", ";", "-- only a comment"}) {
        auto r = parse(sql, E);
        ASSERT_FALSE(r.ok()) << sql;
        EXPECT_EQ(r.diagnostic().kind, DiagnosticKind::SyntaxError);
    }
}

TEST(Parse, DiagnosticCarriesLocation) {
    auto r = parse("SELECT name FROM employee WHERE", E);
    ASSERT_FALSE(r.ok());
    ASSERT_TRUE(r.diagnostic().location.has_value());
    EXPECT_LE(r.diagnostic().location->begin, std::string("SELECT name FROM employee WHERE").size());
    EXPECT_NE(r.diagnostic().message().find("SyntaxError"), std::string::npos);
}

TEST(Parse, RejectsMultipleStatementsAndTrailingGarbage) {
    EXPECT_FALSE(parse("SELECT 1; SELECT 2", E).ok());
    EXPECT_FALSE(parse("SELECT 1 FROM employee employee2 extra", E).ok());
    EXPECT_FALSE(parse("SELECT 'unterminated", E).ok());
    EXPECT_FALSE(parse("DELETE FROM employee", E).ok());
}

TEST(Parse, DialectSpecificSyntax) {
    EXPECT_TRUE(parse("SELECT `name` FROM `employee`", Dialect::MySql).ok());
    EXPECT_TRUE(parse("SELECT \"name\", amount::text FROM orders", Dialect::PostgreSql).ok());
    EXPECT_TRUE(parse("SELECT get_json_object(payload, '$.a') FROM events", Dialect::Hive).ok());
    EXPECT_TRUE(parse("CREATE VIEW v AS SELECT name FROM employee", E).ok());
}

TEST(Parse, NeverThrowsOnFuzzedInput) {
    std::mt19937 rng(7);
    const std::vector<std::string> pieces = {
        "SELECT", "FROM", "WHERE", "(", ")", ",", "name", "employee", "'x'", "\"y\"", "1", "2.5", "*", "=",
        "AND", "OR", "GROUP", "BY", "ORDER", "JOIN", "ON", "AS", "CASE", "WHEN", "THEN", "END", "IN", "NOT",
        "LIMIT", "UNION", "WITH", ";", "--", "/*", "`", ".", "::", "[", "]", "BETWEEN", "IS", "NULL", "OVER"};
    for (int i = 0; i < 3000; ++i) {
        std::string sql;
        int n = 1 + static_cast<int>(rng() % 14);
        for (int j = 0; j < n; ++j) sql += pieces[rng() % pieces.size()] + " ";
        for (Dialect d : {E, Dialect::MySql, Dialect::PostgreSql, Dialect::Hive}) {
            EXPECT_NO_THROW({
                auto r = parse(sql, d);
                if (!r.ok()) EXPECT_EQ(r.diagnostic().kind, DiagnosticKind::SyntaxError);
            }) << sql;
        }
    }
    for (int i = 0; i < 2000; ++i) {
        std::string bytes(rng() % 40, '\0');
        for (auto& b : bytes) b = static_cast<char>(rng() % 256);
        EXPECT_NO_THROW(parse(bytes, E));
    }
}

TEST(Lexer, SplitStatementsRespectsQuotes) {
    auto parts = split_statements("INSERT INTO t VALUES ('a;b'); -- c;\nSELECT 1;;  ", E);
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_NE(parts[0].find("'a;b'"), std::string::npos);
}

TEST(Lexer, BacktickIsIdentifierOutsidePostgres) {
    std::vector<Token> toks;
    LexError err;
    ASSERT_TRUE(tokenize("SELECT `year` FROM t", Dialect::MySql, toks, err));
    EXPECT_EQ(toks[1].kind, TokenKind::QuotedIdentifier);
    EXPECT_EQ(toks[1].text, "year");
    ASSERT_TRUE(tokenize("SELECT \"year\" FROM t", Dialect::PostgreSql, toks, err));
    EXPECT_EQ(toks[1].kind, TokenKind::QuotedIdentifier);
    ASSERT_TRUE(tokenize("SELECT \"year\" FROM t", E, toks, err));
    EXPECT_EQ(toks[1].kind, TokenKind::String);
}

class LineageCorpus : public ::testing::TestWithParam<LineageCase> {};

TEST_P(LineageCorpus, MatchesHandOracle) {
    const LineageCase& lc = GetParam();
    const Catalog* cat = lc.with_catalog ? &catalog() : nullptr;
    Lineage got = extract_lineage(lc.sql, lc.dialect, cat);
    Lineage want = expected_of(lc);
    EXPECT_EQ(got, want) << "got\n" << describe(got) << "\nwant\n" << describe(want);
}

TEST_P(LineageCorpus, EveryFieldTableIsListed) {
    const LineageCase& lc = GetParam();
    Lineage got = extract_lineage(lc.sql, lc.dialect, lc.with_catalog ? &catalog() : nullptr);
    for (const auto& f : got.fields) EXPECT_TRUE(got.tables.count(f.table)) << f.table;
}

TEST_P(LineageCorpus, StableUnderWhitespaceAndComments) {
    const LineageCase& lc = GetParam();
    const Catalog* cat = lc.with_catalog ? &catalog() : nullptr;
    EXPECT_EQ(extract_lineage(reformat(lc.sql), lc.dialect, cat), extract_lineage(lc.sql, lc.dialect, cat));
}

TEST_P(LineageCorpus, ValidFieldsExistInCatalog) {
    const LineageCase& lc = GetParam();
    if (!validate(lc.sql, lc.dialect, catalog()).empty()) GTEST_SKIP() << "not valid against the fixtures";
    Lineage got = extract_lineage(lc.sql, lc.dialect, &catalog());
    for (const auto& f : got.fields) {
        auto t = catalog().find_table(f.table);
        ASSERT_TRUE(t) << f.table;
        EXPECT_TRUE(t->find_field(f.column)) << f.table << "." << f.column;
    }
}

INSTANTIATE_TEST_SUITE_P(Corpus, LineageCorpus, ::testing::ValuesIn(lineage_corpus()),
                         [](const ::testing::TestParamInfo<LineageCase>& info) { return info.param.name; });

TEST(Lineage, CorpusIsLargeEnough) { EXPECT_GE(lineage_corpus().size(), 50u); }

TEST(Lineage, UnparseableRaisesNotParsed) {
    try {
        extract_lineage("SELEC 1", E);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotParsed);
    }
}

TEST(Validate, ValidEmployeeQuery) {
    EXPECT_TRUE(validate(askdata::testing::kZhouHuiSql, E, catalog()).empty());
}

TEST(Validate, UnknownTable) {
    auto d = validate("SELECT x FROM ghost_table", E, catalog());
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].kind, DiagnosticKind::UnknownTable);
    EXPECT_EQ(d[0].subject, "ghost_table");
}

TEST(Validate, UnknownColumn) {
    auto d = validate("SELECT bogus_col FROM employee", E, catalog());
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].kind, DiagnosticKind::UnknownColumn);
    EXPECT_EQ(d[0].subject, "bogus_col");
}

TEST(Validate, OneDiagnosticPerDistinctProblem) {
    auto d = validate("SELECT bogus, bogus, other FROM employee WHERE bogus > 1", E, catalog());
    EXPECT_EQ(d.size(), 2u);
}

TEST(Validate, SyntaxErrorOnly) {
    auto d = validate("SELECT FROM", E, catalog());
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].kind, DiagnosticKind::SyntaxError);
}

TEST(Validate, PermissiveDialectsSkipColumns) {
    Catalog c;
    TableSchema t = askdata::testing::employee_schema();
    t.dialect = Dialect::Hive;
    c.register_table(t);
    EXPECT_TRUE(validate("SELECT get_json_object(bogus, '$.x') FROM employee", Dialect::Hive, c).empty());
    auto d = validate("SELECT a FROM ghost", Dialect::Hive, c);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].kind, DiagnosticKind::UnknownTable);
}

TEST(Validate, AliasesAndDerivedColumnsAreKnown) {
    EXPECT_TRUE(validate("SELECT grade, COUNT(*) AS n FROM Highschooler GROUP BY grade ORDER BY n DESC", E,
                         catalog())
                    .empty());
    EXPECT_TRUE(validate("WITH g AS (SELECT grade AS gr FROM Highschooler) SELECT gr FROM g", E, catalog()).empty());
    EXPECT_FALSE(validate("WITH g AS (SELECT grade AS gr FROM Highschooler) SELECT grade FROM g", E, catalog())
                     .empty());
}

bool engine_reports_unknown_name(const std::string& message) {
    return message.find("no such table") != std::string::npos ||
           message.find("no such column") != std::string::npos;
}

// Generated queries over real and bogus names, run through both validate and
// the embedded engine.
TEST(Validate, AgreesWithEmbeddedEngine) {
    auto conn = askdata::testing::fixture_connection();
    const std::vector<std::string> tables = {"employee", "Highschooler", "ghost"};
    const std::vector<std::string> columns = {"name", "month", "grade", "bogus", "ID"};
    const std::vector<std::string> shapes = {
        "SELECT {c} FROM {t}",
        "SELECT {c} FROM {t} WHERE {d} > 1",
        "SELECT {c}, COUNT(*) FROM {t} GROUP BY {c}",
        "SELECT {c} FROM {t} ORDER BY {d}",
        "SELECT a.{c} FROM {t} a JOIN {u} b ON a.{d} = b.{d}",
        "SELECT {c} FROM {t} WHERE {d} IN (SELECT {d} FROM {u})",
        "WITH w AS (SELECT {c} FROM {t}) SELECT {c} FROM w",
        "SELECT x.{c} FROM (SELECT {c}, {d} FROM {t}) x WHERE x.{d} IS NOT NULL",
        "SELECT {c} FROM {t} WHERE EXISTS (SELECT 1 FROM {u} WHERE {u}.{d} = {t}.{d})",
        "SELECT {c} FROM {t} UNION SELECT {d} FROM {u}",
    };
    auto fill = [](std::string s, const std::string& key, const std::string& v) {
        for (size_t p; (p = s.find(key)) != std::string::npos;) s.replace(p, key.size(), v);
        return s;
    };
    size_t checked = 0, engine_rejections = 0;
    for (const auto& shape : shapes) {
        for (const auto& t : tables) {
            for (const auto& u : tables) {
                if (shape.find("{u}") == std::string::npos && u != tables.front()) continue;
                for (const auto& c : columns) {
                    for (const auto& d : columns) {
                        std::string sql = fill(fill(fill(fill(shape, "{t}", t), "{u}", u), "{c}", c), "{d}", d);
                        auto diags = validate(sql, E, catalog());
                        std::string engine_error;
                        try {
                            conn->execute(sql, 10);
                        } catch (const Error& e) {
                            engine_error = e.what();
                        }
                        ++checked;
                        if (engine_reports_unknown_name(engine_error)) {
                            ++engine_rejections;
                            EXPECT_FALSE(diags.empty()) << sql << " -> " << engine_error;
                        }
                        if (diags.empty()) EXPECT_EQ(engine_error, "") << sql;
                    }
                }
            }
        }
    }
    EXPECT_GT(checked, 500u);
    EXPECT_GT(engine_rejections, 100u);
}

}  // namespace
}  // namespace askdata::sql
