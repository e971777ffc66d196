#include "askdata/engine.hpp"

#include <sqlite3.h>

#include <cstring>
#include <ctime>
#include <regex>

#include "askdata/error.hpp"
#include "askdata/sql/lexer.hpp"

namespace askdata {

nlohmann::json ExecutionResult::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows) rows_json.push_back(row);
    return {{"columns", columns}, {"rows", rows_json}, {"row_count", row_count}, {"truncated", truncated}};
}

ExecutionResult ExecutionResult::from_json(const nlohmann::json& j) {
    ExecutionResult r;
    r.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) r.rows.push_back(row.get<Row>());
    r.row_count = j.value("row_count", r.rows.size());
    r.truncated = j.value("truncated", false);
    return r;
}

std::string to_sqlite(std::string_view sql, Dialect dialect) {
    std::vector<sql::Token> tokens;
    sql::LexError error;
    if (!sql::tokenize(sql, dialect, tokens, error)) return std::string(sql);
    std::string out;
    const sql::Token* prev = nullptr;
    for (const auto& t : tokens) {
        if (t.kind == sql::TokenKind::End) break;
        bool glue = prev && (prev->is_punct('.') || t.is_punct('.') || t.is_punct(',') || t.is_punct(')') ||
                             prev->is_punct('('));
        if (prev && !glue) out.push_back(' ');
        switch (t.kind) {
            case sql::TokenKind::String: {
                out.push_back('\'');
                for (char c : t.text) {
                    if (c == '\'') out += "''";
                    else out.push_back(c);
                }
                out.push_back('\'');
                break;
            }
            case sql::TokenKind::QuotedIdentifier: {
                out.push_back('"');
                for (char c : t.text) {
                    if (c == '"') out += "\"\"";
                    else out.push_back(c);
                }
                out.push_back('"');
                break;
            }
            case sql::TokenKind::Keyword:
                if (t.text == "ILIKE") out += "LIKE";
                else if (t.text == "RLIKE") out += "REGEXP";
                else out += t.text;
                break;
            default: out += t.text;
        }
        prev = &t;
    }
    return out;
}

namespace {

bool truthy(sqlite3_value* v) {
    switch (sqlite3_value_type(v)) {
        case SQLITE_NULL: return false;
        case SQLITE_INTEGER: return sqlite3_value_int64(v) != 0;
        case SQLITE_FLOAT: return sqlite3_value_double(v) != 0.0;
        default: {
            const char* s = reinterpret_cast<const char*>(sqlite3_value_text(v));
            return s && std::strtod(s, nullptr) != 0.0;
        }
    }
}

void fn_if(sqlite3_context* ctx, int, sqlite3_value** argv) {
    sqlite3_result_value(ctx, truthy(argv[0]) ? argv[1] : argv[2]);
}

void fn_concat(sqlite3_context* ctx, int argc, sqlite3_value** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (sqlite3_value_type(argv[i]) == SQLITE_NULL) {
            sqlite3_result_null(ctx);
            return;
        }
        out += reinterpret_cast<const char*>(sqlite3_value_text(argv[i]));
    }
    sqlite3_result_text(ctx, out.c_str(), static_cast<int>(out.size()), SQLITE_TRANSIENT);
}

// Component of a 'YYYY-MM-DD[...]' value: 0 year, 1 month, 2 day.
void date_part(sqlite3_context* ctx, sqlite3_value* v, int part) {
    if (sqlite3_value_type(v) == SQLITE_NULL) {
        sqlite3_result_null(ctx);
        return;
    }
    const char* s = reinterpret_cast<const char*>(sqlite3_value_text(v));
    int y = 0, m = 0, d = 0;
    if (!s || std::sscanf(s, "%d-%d-%d", &y, &m, &d) != 3) {
        sqlite3_result_null(ctx);
        return;
    }
    sqlite3_result_int(ctx, part == 0 ? y : part == 1 ? m : d);
}

void fn_year(sqlite3_context* ctx, int, sqlite3_value** argv) { date_part(ctx, argv[0], 0); }
void fn_month(sqlite3_context* ctx, int, sqlite3_value** argv) { date_part(ctx, argv[0], 1); }
void fn_day(sqlite3_context* ctx, int, sqlite3_value** argv) { date_part(ctx, argv[0], 2); }

void fn_regexp(sqlite3_context* ctx, int, sqlite3_value** argv) {
    // SQLite calls regexp(pattern, subject) for "subject REGEXP pattern".
    if (sqlite3_value_type(argv[0]) == SQLITE_NULL || sqlite3_value_type(argv[1]) == SQLITE_NULL) {
        sqlite3_result_null(ctx);
        return;
    }
    try {
        std::regex re(reinterpret_cast<const char*>(sqlite3_value_text(argv[0])), std::regex::extended);
        sqlite3_result_int(ctx, std::regex_search(reinterpret_cast<const char*>(sqlite3_value_text(argv[1])), re));
    } catch (const std::regex_error& e) {
        sqlite3_result_error(ctx, e.what(), -1);
    }
}

void fn_clock(sqlite3_context* ctx, const char* format) {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    localtime_r(&now, &tm);
    char buf[32];
    size_t n = std::strftime(buf, sizeof buf, format, &tm);
    sqlite3_result_text(ctx, buf, static_cast<int>(n), SQLITE_TRANSIENT);
}

void fn_curdate(sqlite3_context* ctx, int, sqlite3_value**) { fn_clock(ctx, "%Y-%m-%d"); }
void fn_now(sqlite3_context* ctx, int, sqlite3_value**) { fn_clock(ctx, "%Y-%m-%d %H:%M:%S"); }

Cell read_cell(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_INTEGER: return static_cast<std::int64_t>(sqlite3_column_int64(stmt, col));
        case SQLITE_FLOAT: return sqlite3_column_double(stmt, col);
        case SQLITE_NULL: return nullptr;
        default: {
            const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt, col));
            return std::string(text ? text : "", static_cast<size_t>(sqlite3_column_bytes(stmt, col)));
        }
    }
}

}  // namespace

struct EmbeddedConnection::Impl {
    sqlite3* db = nullptr;
    std::mutex mutex;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::ExecutionError, what + ": " + sqlite3_errmsg(db));
    }
};

EmbeddedConnection::EmbeddedConnection(const std::string& path) : impl_(std::make_unique<Impl>()) {
    if (sqlite3_open(path.c_str(), &impl_->db) != SQLITE_OK) {
        std::string msg = impl_->db ? sqlite3_errmsg(impl_->db) : "out of memory";
        sqlite3_close(impl_->db);
        throw Error(ErrorKind::ExecutionError, "cannot open " + path + ": " + msg);
    }
    struct Fn {
        const char* name;
        int argc;
        void (*fn)(sqlite3_context*, int, sqlite3_value**);
    };
    const Fn fns[] = {{"if", 3, fn_if},       {"concat", -1, fn_concat}, {"year", 1, fn_year},
                      {"month", 1, fn_month}, {"day", 1, fn_day},        {"regexp", 2, fn_regexp}};
    for (const auto& f : fns) {
        sqlite3_create_function(impl_->db, f.name, f.argc, SQLITE_UTF8 | SQLITE_DETERMINISTIC, nullptr, f.fn,
                                nullptr, nullptr);
    }
    sqlite3_create_function(impl_->db, "curdate", 0, SQLITE_UTF8, nullptr, fn_curdate, nullptr, nullptr);
    sqlite3_create_function(impl_->db, "now", 0, SQLITE_UTF8, nullptr, fn_now, nullptr, nullptr);
}

EmbeddedConnection::~EmbeddedConnection() { sqlite3_close(impl_->db); }

ExecutionResult EmbeddedConnection::execute(std::string_view sql, std::size_t row_limit) {
    const auto start = std::chrono::steady_clock::now();
    std::string text = to_sqlite(sql, Dialect::Embedded);
    std::lock_guard lock(impl_->mutex);
    sqlite3_stmt* stmt = nullptr;
    const char* tail = nullptr;
    if (sqlite3_prepare_v2(impl_->db, text.c_str(), static_cast<int>(text.size()), &stmt, &tail) != SQLITE_OK) {
        impl_->fail("prepare failed");
    }
    std::unique_ptr<sqlite3_stmt, int (*)(sqlite3_stmt*)> guard(stmt, sqlite3_finalize);
    if (!stmt) throw Error(ErrorKind::ExecutionError, "empty statement");
    for (const char* p = tail; p && *p; ++p) {
        if (!std::isspace(static_cast<unsigned char>(*p)) && *p != ';') {
            throw Error(ErrorKind::ExecutionError, "multiple statements are not allowed");
        }
    }
    ExecutionResult result;
    const int ncols = sqlite3_column_count(stmt);
    for (int c = 0; c < ncols; ++c) result.columns.emplace_back(sqlite3_column_name(stmt, c));
    while (true) {
        int rc = sqlite3_step(stmt);
        if (rc == SQLITE_DONE) break;
        if (rc != SQLITE_ROW) impl_->fail("execution failed");
        if (result.rows.size() >= row_limit) {
            result.truncated = true;
            break;
        }
        Row row;
        row.reserve(static_cast<size_t>(ncols));
        for (int c = 0; c < ncols; ++c) row.push_back(read_cell(stmt, c));
        result.rows.push_back(std::move(row));
    }
    result.row_count = result.rows.size();
    result.elapsed =
        std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
    return result;
}

void EmbeddedConnection::execute_script(std::string_view script) {
    std::lock_guard lock(impl_->mutex);
    for (const auto& statement : sql::split_statements(script, Dialect::Embedded)) {
        std::string text = to_sqlite(statement, Dialect::Embedded);
        char* err = nullptr;
        if (sqlite3_exec(impl_->db, text.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "unknown error";
            sqlite3_free(err);
            throw Error(ErrorKind::ExecutionError, "script failed: " + msg);
        }
    }
}

ExecutionResult UnconfiguredConnection::execute(std::string_view, std::size_t) {
    throw Error(ErrorKind::NotConfigured,
                "no live driver for " + std::string(to_string(dialect_)) + " connection '" + dsn_ + "'");
}

void UnconfiguredConnection::execute_script(std::string_view) {
    throw Error(ErrorKind::NotConfigured,
                "no live driver for " + std::string(to_string(dialect_)) + " connection '" + dsn_ + "'");
}

std::shared_ptr<Connection> open_connection(Dialect dialect, const std::string& dsn) {
    if (dialect == Dialect::Embedded) return std::make_shared<EmbeddedConnection>(dsn.empty() ? ":memory:" : dsn);
    return std::make_shared<UnconfiguredConnection>(dialect, dsn);
}

void ConnectionRegistry::add(const std::string& name, std::shared_ptr<Connection> connection) {
    std::lock_guard lock(mutex_);
    connections_[name] = std::move(connection);
}

std::shared_ptr<Connection> ConnectionRegistry::get(const std::string& name) const {
    std::lock_guard lock(mutex_);
    auto it = connections_.find(name);
    if (it == connections_.end()) throw Error(ErrorKind::NotFound, "connection '" + name + "'");
    return it->second;
}

bool ConnectionRegistry::has(const std::string& name) const {
    std::lock_guard lock(mutex_);
    return connections_.count(name) > 0;
}

}  // namespace askdata
