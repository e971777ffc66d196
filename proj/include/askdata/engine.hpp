#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "askdata/catalog.hpp"

namespace askdata {

/// Cells are JSON scalars: null, integer, float or string.
using Cell = nlohmann::json;
using Row = std::vector<Cell>;

struct ExecutionResult {
    std::vector<std::string> columns;
    std::vector<Row> rows;
    std::size_t row_count = 0;
    std::chrono::microseconds elapsed{0};
    /// More rows were available than the row limit admitted.
    bool truncated = false;

    /// Omits `elapsed` so serialized results are reproducible.
    nlohmann::json to_json() const;
    static ExecutionResult from_json(const nlohmann::json& j);
};

class Connection {
public:
    virtual ~Connection() = default;
    virtual Dialect dialect() const = 0;
    /// Throws Error(ExecutionError) with the engine's message on failure.
    virtual ExecutionResult execute(std::string_view sql, std::size_t row_limit) = 0;
    /// Runs a DDL/DML script (statements separated by ';').
    virtual void execute_script(std::string_view script) = 0;
};

/// In-process SQLite engine speaking the embedded (MySQL-flavoured) dialect.
class EmbeddedConnection final : public Connection {
public:
    explicit EmbeddedConnection(const std::string& path = ":memory:");
    ~EmbeddedConnection() override;
    EmbeddedConnection(const EmbeddedConnection&) = delete;
    EmbeddedConnection& operator=(const EmbeddedConnection&) = delete;

    Dialect dialect() const override { return Dialect::Embedded; }
    ExecutionResult execute(std::string_view sql, std::size_t row_limit) override;
    void execute_script(std::string_view script) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Contract-only driver for engines not available in-process.
class UnconfiguredConnection final : public Connection {
public:
    UnconfiguredConnection(Dialect dialect, std::string dsn) : dialect_(dialect), dsn_(std::move(dsn)) {}
    Dialect dialect() const override { return dialect_; }
    ExecutionResult execute(std::string_view sql, std::size_t row_limit) override;
    void execute_script(std::string_view script) override;

private:
    Dialect dialect_;
    std::string dsn_;
};

/// Rewrites embedded/mysql SQL into text SQLite accepts: "..." strings
/// become '...', `ident` becomes "ident", comments are dropped.
std::string to_sqlite(std::string_view sql, Dialect dialect);

/// Opens a connection for a profile; non-embedded dialects get an
/// UnconfiguredConnection.
std::shared_ptr<Connection> open_connection(Dialect dialect, const std::string& dsn);

class ConnectionRegistry {
public:
    void add(const std::string& name, std::shared_ptr<Connection> connection);
    /// Throws Error(NotFound).
    std::shared_ptr<Connection> get(const std::string& name) const;
    bool has(const std::string& name) const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Connection>> connections_;
};

}  // namespace askdata
