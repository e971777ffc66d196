#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "askdata/common.hpp"

namespace askdata {

enum class Dialect { MySql, PostgreSql, Hive, Spark, Flink, Embedded };

std::string_view to_string(Dialect dialect);
/// Throws Error(UnknownDialect).
Dialect parse_dialect(std::string_view name);
/// Hive, Spark and Flink get lineage but only syntax/table validation.
bool is_permissive(Dialect dialect);

struct FieldSpec {
    std::string name;
    std::string data_type;
    std::string description;
    std::map<std::string, std::string> enum_values;
    std::map<std::string, std::string> nested_keys;

    bool operator==(const FieldSpec&) const = default;
};

struct TableSchema {
    std::string table_name;
    std::vector<FieldSpec> fields;
    Dialect dialect = Dialect::Embedded;
    std::string description;

    const FieldSpec* find_field(std::string_view name) const;
    bool operator==(const TableSchema&) const = default;
};

struct ThematicDomain {
    std::string domain_id;
    std::vector<std::string> tables;
};

/// A (table, column) pair. Comparison ignores ASCII case, like SQL identifiers.
struct ColumnRef {
    std::string table;
    std::string column;

    friend bool operator<(const ColumnRef& a, const ColumnRef& b);
    friend bool operator==(const ColumnRef& a, const ColumnRef& b);
};

using ColumnSet = std::set<ColumnRef>;

struct AccessGrant {
    std::string user_id;
    std::string table_name;
    /// nullopt grants every column of the table.
    std::optional<NameSet> columns;
};

struct AuthVerdict {
    bool allowed = false;
    std::vector<ColumnRef> missing;
    std::string reason;

    static AuthVerdict allow();
    static AuthVerdict deny(std::vector<ColumnRef> missing, std::string reason);
};

/// Governed table metadata, thematic domains and access grants.
///
/// Reads may run concurrently; writers are serialized. Registered schemas are
/// immutable once published, so a `shared_ptr` handed to a reader stays valid
/// even if the table is re-registered afterwards.
class Catalog {
public:
    Catalog() = default;
    Catalog(const Catalog& other);
    Catalog& operator=(const Catalog& other);

    /// Returns the table id (lower-cased table name). Replaces any previous
    /// registration of the same name.
    std::string register_table(TableSchema schema);
    void register_domain(ThematicDomain domain);
    void grant(AccessGrant grant);

    std::shared_ptr<const TableSchema> find_table(std::string_view name) const;
    bool has_domain(std::string_view domain_id) const;
    std::vector<std::string> domain_ids() const;
    /// Throws Error(UnknownDomain).
    std::vector<TableSchema> domain_schemas(std::string_view domain_id) const;
    /// Dialect of the first table of the domain.
    Dialect domain_dialect(std::string_view domain_id) const;
    std::vector<TableSchema> tables() const;

    /// Allowed iff every referenced pair is covered by a grant of `user_id`.
    /// Throws Error(UnknownTable) when a referenced table is not registered.
    AuthVerdict check_access(std::string_view user_id, const ColumnSet& referenced) const;

    nlohmann::json to_json() const;
    /// Document restricted to one domain: its tables and the grants on them.
    nlohmann::json domain_to_json(std::string_view domain_id) const;
    static Catalog from_json(const nlohmann::json& doc);
    static Catalog load(const std::string& path);
    void save(const std::string& path) const;

private:
    mutable std::shared_mutex mutex_;
    std::vector<std::string> table_order_;
    std::map<std::string, std::shared_ptr<const TableSchema>> tables_;
    std::vector<ThematicDomain> domains_;
    std::vector<AccessGrant> grants_;
};

void validate_schema(const TableSchema& schema);

nlohmann::json to_json(const TableSchema& schema);
TableSchema table_schema_from_json(const nlohmann::json& j);

/// Prompt-ready schema description. When `linked` is given, only those
/// fields are listed and their enum values are spelled out.
std::string describe_schema(const TableSchema& schema, const NameSet* linked = nullptr);
std::string describe_schemas(const std::vector<TableSchema>& schemas);

}  // namespace askdata
