#include "askdata/catalog.hpp"

#include <algorithm>
#include <mutex>

#include "askdata/error.hpp"

namespace askdata {

using nlohmann::json;

namespace {

constexpr int kCatalogVersion = 1;

bool name_less(std::string_view a, std::string_view b) { return CaseInsensitiveLess{}(a, b); }

}  // namespace

std::string_view to_string(Dialect dialect) {
    switch (dialect) {
        case Dialect::MySql: return "mysql";
        case Dialect::PostgreSql: return "postgresql";
        case Dialect::Hive: return "hive";
        case Dialect::Spark: return "spark";
        case Dialect::Flink: return "flink";
        case Dialect::Embedded: return "embedded";
    }
    return "embedded";
}

Dialect parse_dialect(std::string_view name) {
    std::string n = to_lower(trim(name));
    if (n == "mysql") return Dialect::MySql;
    if (n == "postgresql" || n == "postgres") return Dialect::PostgreSql;
    if (n == "hive") return Dialect::Hive;
    if (n == "spark") return Dialect::Spark;
    if (n == "flink") return Dialect::Flink;
    if (n == "embedded") return Dialect::Embedded;
    throw Error(ErrorKind::UnknownDialect, "unknown SQL dialect '" + std::string(name) + "'");
}

bool is_permissive(Dialect dialect) {
    return dialect == Dialect::Hive || dialect == Dialect::Spark || dialect == Dialect::Flink;
}

const FieldSpec* TableSchema::find_field(std::string_view name) const {
    for (const auto& f : fields) {
        if (iequals(f.name, name)) return &f;
    }
    return nullptr;
}

bool operator<(const ColumnRef& a, const ColumnRef& b) {
    if (name_less(a.table, b.table)) return true;
    if (name_less(b.table, a.table)) return false;
    return name_less(a.column, b.column);
}

bool operator==(const ColumnRef& a, const ColumnRef& b) {
    return iequals(a.table, b.table) && iequals(a.column, b.column);
}

AuthVerdict AuthVerdict::allow() { return AuthVerdict{true, {}, {}}; }

AuthVerdict AuthVerdict::deny(std::vector<ColumnRef> missing, std::string reason) {
    return AuthVerdict{false, std::move(missing), std::move(reason)};
}

void validate_schema(const TableSchema& schema) {
    if (trim(schema.table_name).empty()) throw Error(ErrorKind::InvalidArgument, "table name is empty");
    NameSet seen;
    for (const auto& field : schema.fields) {
        if (trim(field.name).empty()) {
            throw Error(ErrorKind::InvalidArgument, "field with empty name in table " + schema.table_name);
        }
        if (!seen.insert(field.name).second) {
            throw Error(ErrorKind::DuplicateField, schema.table_name + "." + field.name);
        }
        if (trim(field.description).empty()) {
            throw Error(ErrorKind::EmptyDescription, schema.table_name + "." + field.name + " has no description");
        }
    }
}

Catalog::Catalog(const Catalog& other) {
    std::shared_lock lock(other.mutex_);
    table_order_ = other.table_order_;
    tables_ = other.tables_;
    domains_ = other.domains_;
    grants_ = other.grants_;
}

Catalog& Catalog::operator=(const Catalog& other) {
    if (this == &other) return *this;
    Catalog copy(other);
    std::unique_lock lock(mutex_);
    table_order_ = std::move(copy.table_order_);
    tables_ = std::move(copy.tables_);
    domains_ = std::move(copy.domains_);
    grants_ = std::move(copy.grants_);
    return *this;
}

std::string Catalog::register_table(TableSchema schema) {
    validate_schema(schema);
    std::string id = to_lower(schema.table_name);
    auto published = std::make_shared<const TableSchema>(std::move(schema));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = tables_.insert_or_assign(id, std::move(published));
    if (inserted) table_order_.push_back(id);
    return id;
}

void Catalog::register_domain(ThematicDomain domain) {
    if (trim(domain.domain_id).empty()) throw Error(ErrorKind::InvalidArgument, "domain id is empty");
    if (domain.tables.empty()) {
        throw Error(ErrorKind::InvalidArgument, "domain " + domain.domain_id + " has no tables");
    }
    std::unique_lock lock(mutex_);
    for (const auto& t : domain.tables) {
        if (!tables_.count(to_lower(t))) {
            throw Error(ErrorKind::UnknownTable, t + " (domain " + domain.domain_id + ")");
        }
    }
    for (auto& d : domains_) {
        if (d.domain_id == domain.domain_id) {
            d = std::move(domain);
            return;
        }
    }
    domains_.push_back(std::move(domain));
}

void Catalog::grant(AccessGrant grant) {
    std::unique_lock lock(mutex_);
    auto it = tables_.find(to_lower(grant.table_name));
    if (it == tables_.end()) throw Error(ErrorKind::UnknownTable, grant.table_name);
    if (grant.columns) {
        for (const auto& c : *grant.columns) {
            if (!it->second->find_field(c)) {
                throw Error(ErrorKind::InvalidArgument,
                            "grant on unknown column " + grant.table_name + "." + c);
            }
        }
    }
    grants_.push_back(std::move(grant));
}

std::shared_ptr<const TableSchema> Catalog::find_table(std::string_view name) const {
    std::shared_lock lock(mutex_);
    auto it = tables_.find(to_lower(name));
    if (it != tables_.end()) return it->second;
    // Allow "db.table" style references to resolve on the last segment.
    auto dot = name.rfind('.');
    if (dot != std::string_view::npos) {
        it = tables_.find(to_lower(name.substr(dot + 1)));
        if (it != tables_.end()) return it->second;
    }
    return nullptr;
}

bool Catalog::has_domain(std::string_view domain_id) const {
    std::shared_lock lock(mutex_);
    return std::any_of(domains_.begin(), domains_.end(), [&](const auto& d) { return d.domain_id == domain_id; });
}

std::vector<std::string> Catalog::domain_ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> ids;
    for (const auto& d : domains_) ids.push_back(d.domain_id);
    return ids;
}

std::vector<TableSchema> Catalog::domain_schemas(std::string_view domain_id) const {
    std::shared_lock lock(mutex_);
    for (const auto& d : domains_) {
        if (d.domain_id != domain_id) continue;
        std::vector<TableSchema> out;
        out.reserve(d.tables.size());
        for (const auto& t : d.tables) {
            auto it = tables_.find(to_lower(t));
            if (it == tables_.end()) throw Error(ErrorKind::UnknownTable, t);
            out.push_back(*it->second);
        }
        return out;
    }
    throw Error(ErrorKind::UnknownDomain, std::string(domain_id));
}

Dialect Catalog::domain_dialect(std::string_view domain_id) const {
    auto schemas = domain_schemas(domain_id);
    return schemas.front().dialect;
}

std::vector<TableSchema> Catalog::tables() const {
    std::shared_lock lock(mutex_);
    std::vector<TableSchema> out;
    for (const auto& id : table_order_) out.push_back(*tables_.at(id));
    return out;
}

AuthVerdict Catalog::check_access(std::string_view user_id, const ColumnSet& referenced) const {
    std::shared_lock lock(mutex_);
    std::vector<ColumnRef> missing;
    for (const auto& ref : referenced) {
        if (!tables_.count(to_lower(ref.table))) throw Error(ErrorKind::UnknownTable, ref.table);
        bool covered = std::any_of(grants_.begin(), grants_.end(), [&](const AccessGrant& g) {
            return g.user_id == user_id && iequals(g.table_name, ref.table) &&
                   (!g.columns || g.columns->count(ref.column) > 0);
        });
        if (!covered) missing.push_back(ref);
    }
    if (missing.empty()) return AuthVerdict::allow();
    std::string reason = "inadequate authorization: missing grants on ";
    for (size_t i = 0; i < missing.size(); ++i) {
        if (i) reason += ", ";
        reason += missing[i].table + "." + missing[i].column;
    }
    return AuthVerdict::deny(std::move(missing), std::move(reason));
}

json to_json(const TableSchema& schema) {
    json fields = json::array();
    for (const auto& f : schema.fields) {
        json jf = {{"name", f.name}, {"data_type", f.data_type}, {"description", f.description}};
        if (!f.enum_values.empty()) jf["enum_values"] = f.enum_values;
        if (!f.nested_keys.empty()) jf["nested_keys"] = f.nested_keys;
        fields.push_back(std::move(jf));
    }
    return json{{"table_name", schema.table_name},
                {"dialect", std::string(to_string(schema.dialect))},
                {"description", schema.description},
                {"fields", std::move(fields)}};
}

TableSchema table_schema_from_json(const json& j) {
    TableSchema s;
    s.table_name = j.at("table_name").get<std::string>();
    s.dialect = parse_dialect(j.value("dialect", std::string("embedded")));
    s.description = j.value("description", std::string());
    for (const auto& jf : j.at("fields")) {
        FieldSpec f;
        f.name = jf.at("name").get<std::string>();
        f.data_type = jf.value("data_type", std::string());
        f.description = jf.value("description", std::string());
        if (jf.contains("enum_values")) f.enum_values = jf["enum_values"].get<std::map<std::string, std::string>>();
        if (jf.contains("nested_keys")) f.nested_keys = jf["nested_keys"].get<std::map<std::string, std::string>>();
        s.fields.push_back(std::move(f));
    }
    return s;
}

namespace {

json grant_to_json(const AccessGrant& g) {
    json j = {{"user_id", g.user_id}, {"table_name", g.table_name}};
    if (g.columns) {
        j["columns"] = std::vector<std::string>(g.columns->begin(), g.columns->end());
    } else {
        j["columns"] = "ALL";
    }
    return j;
}

}  // namespace

json Catalog::to_json() const {
    std::shared_lock lock(mutex_);
    json doc = {{"version", kCatalogVersion}};
    json domains = json::array();
    for (const auto& d : domains_) domains.push_back({{"domain_id", d.domain_id}, {"tables", d.tables}});
    json tables = json::array();
    for (const auto& id : table_order_) tables.push_back(askdata::to_json(*tables_.at(id)));
    json grants = json::array();
    for (const auto& g : grants_) grants.push_back(grant_to_json(g));
    doc["domains"] = std::move(domains);
    doc["tables"] = std::move(tables);
    doc["grants"] = std::move(grants);
    return doc;
}

json Catalog::domain_to_json(std::string_view domain_id) const {
    auto schemas = domain_schemas(domain_id);
    std::shared_lock lock(mutex_);
    json doc = {{"version", kCatalogVersion}};
    NameSet names;
    json tables = json::array();
    for (const auto& s : schemas) {
        names.insert(s.table_name);
        tables.push_back(askdata::to_json(s));
    }
    json grants = json::array();
    for (const auto& g : grants_) {
        if (names.count(g.table_name)) grants.push_back(grant_to_json(g));
    }
    for (const auto& d : domains_) {
        if (d.domain_id == domain_id) doc["domains"] = json::array({{{"domain_id", d.domain_id}, {"tables", d.tables}}});
    }
    doc["tables"] = std::move(tables);
    doc["grants"] = std::move(grants);
    return doc;
}

Catalog Catalog::from_json(const json& doc) {
    Catalog c;
    for (const auto& jt : doc.value("tables", json::array())) c.register_table(table_schema_from_json(jt));
    for (const auto& jd : doc.value("domains", json::array())) {
        c.register_domain(ThematicDomain{jd.at("domain_id").get<std::string>(),
                                         jd.at("tables").get<std::vector<std::string>>()});
    }
    for (const auto& jg : doc.value("grants", json::array())) {
        AccessGrant g;
        g.user_id = jg.at("user_id").get<std::string>();
        g.table_name = jg.at("table_name").get<std::string>();
        const auto& cols = jg.at("columns");
        if (cols.is_string()) {
            if (cols.get<std::string>() != "ALL") throw Error(ErrorKind::InvalidArgument, "columns must be ALL or a list");
        } else {
            NameSet set;
            for (const auto& c2 : cols) set.insert(c2.get<std::string>());
            g.columns = std::move(set);
        }
        c.grant(std::move(g));
    }
    return c;
}

Catalog Catalog::load(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, path + ": " + e.what());
    }
    return from_json(doc);
}

void Catalog::save(const std::string& path) const { write_file(path, to_json().dump(2) + "\n"); }

std::string describe_schema(const TableSchema& schema, const NameSet* linked) {
    std::string out = "Table " + schema.table_name;
    if (!schema.description.empty()) out += " (" + schema.description + ")";
    out += ":\n";
    for (const auto& f : schema.fields) {
        if (linked && !linked->count(f.name)) continue;
        out += "  - " + f.name;
        if (!f.data_type.empty()) out += " " + f.data_type;
        out += ": " + f.description;
        if (!f.nested_keys.empty()) {
            out += " keys {";
            bool first = true;
            for (const auto& [k, v] : f.nested_keys) {
                if (!first) out += "; ";
                first = false;
                out += k + ": " + v;
            }
            out += "}";
        }
        if (linked && !f.enum_values.empty()) {
            out += " values {";
            bool first = true;
            for (const auto& [k, v] : f.enum_values) {
                if (!first) out += "; ";
                first = false;
                out += k + ": " + v;
            }
            out += "}";
        }
        out += "\n";
    }
    return out;
}

std::string describe_schemas(const std::vector<TableSchema>& schemas) {
    std::string out;
    for (const auto& s : schemas) out += describe_schema(s);
    return out;
}

}  // namespace askdata
