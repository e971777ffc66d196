#include "askdata/sql/lineage.hpp"

#include <deque>
#include <map>
#include <memory>
#include <optional>

#include "askdata/error.hpp"

namespace askdata::sql {

bool Lineage::operator==(const Lineage& other) const {
    auto same_names = [](const NameSet& a, const NameSet& b) {
        if (a.size() != b.size()) return false;
        auto ia = a.begin();
        for (auto ib = b.begin(); ib != b.end(); ++ia, ++ib) {
            if (!iequals(*ia, *ib)) return false;
        }
        return true;
    };
    return same_names(tables, other.tables) && fields == other.fields &&
           same_names(unresolved_columns, other.unresolved_columns);
}

namespace {

struct Shape;

struct Source {
    std::string binding;
    /// Full "db.table" spelling for unaliased base tables.
    std::string alt_binding;
    bool derived = false;
    std::string table;
    std::shared_ptr<const TableSchema> schema;
    std::shared_ptr<const Shape> shape;
};

using SourcePtr = std::shared_ptr<const Source>;

/// Output columns of a derived table or CTE.
struct Shape {
    bool opaque = false;
    NameSet columns;
    std::vector<SourcePtr> passthrough;
};

struct Scope {
    const Scope* parent = nullptr;
    std::vector<SourcePtr> sources;
    NameSet aliases;
    /// Columns merged by JOIN ... USING; unqualified references read every side.
    NameSet using_columns;
};

struct CteEnv {
    const CteEnv* parent = nullptr;
    std::map<std::string, std::shared_ptr<const Shape>, CaseInsensitiveLess> shapes;

    std::shared_ptr<const Shape> find(std::string_view name) const {
        for (const CteEnv* e = this; e; e = e->parent) {
            auto it = e->shapes.find(name);
            if (it != e->shapes.end()) return it->second;
        }
        return nullptr;
    }
};

enum class Found { No, Maybe, Definite };

struct Resolution {
    Found found = Found::No;
    std::optional<ColumnRef> ref;
    bool ambiguous = false;
};

enum class Clause { Select, Where, GroupBy, Having, OrderBy, On, Other };

Resolution resolve_in_source(const Source& src, std::string_view column) {
    if (!src.derived) {
        if (src.schema) {
            if (const FieldSpec* f = src.schema->find_field(column)) {
                return Resolution{Found::Definite, ColumnRef{src.table, f->name}, false};
            }
            return {};
        }
        return Resolution{Found::Maybe, ColumnRef{src.table, std::string(column)}, false};
    }
    const Shape& shape = *src.shape;
    if (shape.opaque || shape.columns.count(column)) return Resolution{Found::Definite, std::nullopt, false};
    std::vector<Resolution> definite;
    std::vector<Resolution> maybe;
    for (const auto& p : shape.passthrough) {
        Resolution r = resolve_in_source(*p, column);
        if (r.found == Found::Definite) definite.push_back(r);
        if (r.found == Found::Maybe) maybe.push_back(r);
    }
    if (definite.size() == 1) return definite.front();
    if (definite.size() > 1) return Resolution{Found::Definite, std::nullopt, true};
    if (maybe.size() == 1) return maybe.front();
    if (maybe.size() > 1) return Resolution{Found::Maybe, std::nullopt, true};
    return {};
}

bool binding_matches(const Source& src, std::string_view qualifier) {
    return iequals(src.binding, qualifier) || (!src.alt_binding.empty() && iequals(src.alt_binding, qualifier));
}

std::string last_segment(const std::string& name) {
    auto dot = name.rfind('.');
    return dot == std::string::npos ? name : name.substr(dot + 1);
}

class Analyzer {
public:
    explicit Analyzer(const Catalog* catalog) : catalog_(catalog) {}

    Analysis run(const Statement& stmt) {
        CteEnv root;
        analyze_query(*stmt.query, nullptr, &root);
        return std::move(result_);
    }

private:
    struct TermResult {
        std::shared_ptr<Shape> shape;
        const Scope* scope = nullptr;
    };

    void problem(DiagnosticKind kind, std::string subject, std::string detail, Span span) {
        for (const auto& p : result_.problems) {
            if (p.kind == kind && iequals(p.subject, subject)) return;
        }
        result_.problems.push_back(SqlDiagnostic{kind, std::move(detail), std::move(subject), span});
    }

    Scope* new_scope(const Scope* parent) {
        scopes_.push_back(std::make_unique<Scope>());
        scopes_.back()->parent = parent;
        return scopes_.back().get();
    }

    std::shared_ptr<Shape> analyze_query(const Query& q, const Scope* outer, const CteEnv* env) {
        auto local = std::make_unique<CteEnv>();
        local->parent = env;
        for (const auto& cte : q.ctes) {
            if (q.recursive) {
                auto placeholder = std::make_shared<Shape>();
                if (cte.columns.empty()) {
                    placeholder->opaque = true;
                } else {
                    placeholder->columns.insert(cte.columns.begin(), cte.columns.end());
                }
                local->shapes[cte.name] = placeholder;
            }
            auto body = analyze_query(*cte.query, outer, local.get());
            if (!cte.columns.empty()) {
                auto named = std::make_shared<Shape>();
                named->columns.insert(cte.columns.begin(), cte.columns.end());
                local->shapes[cte.name] = named;
            } else {
                local->shapes[cte.name] = body;
            }
        }
        const CteEnv* inner_env = local.get();
        envs_.push_back(std::move(local));

        TermResult first = analyze_term(q.first, outer, inner_env);
        for (const auto& [op, term] : q.rest) analyze_term(term, outer, inner_env);

        for (const auto& item : q.order_by) {
            if (q.rest.empty() && first.scope) {
                analyze_expr(*item.expr, *first.scope, Clause::OrderBy, inner_env);
            } else {
                // Set operation: names refer to the result columns.
                const Expr& e = *item.expr;
                if (e.kind == ExprKind::Column && e.qualifier.empty() && first.shape->columns.count(e.name)) continue;
                if (first.scope) analyze_expr(e, *first.scope, Clause::OrderBy, inner_env);
            }
        }
        Scope empty;
        empty.parent = outer;
        if (q.limit) analyze_expr(*q.limit, empty, Clause::Other, inner_env);
        if (q.offset) analyze_expr(*q.offset, empty, Clause::Other, inner_env);
        return first.shape;
    }

    TermResult analyze_term(const QueryTerm& term, const Scope* outer, const CteEnv* env) {
        if (term.nested) return TermResult{analyze_query(*term.nested, outer, env), nullptr};
        return analyze_select(*term.select, outer, env);
    }

    TermResult analyze_select(const SelectCore& core, const Scope* outer, const CteEnv* env) {
        Scope* scope = new_scope(outer);
        for (const auto& ref : core.from) add_table_ref(*ref, *scope, outer, env);
        for (const auto& ref : core.from) analyze_join_conditions(*ref, *scope, env);

        auto shape = std::make_shared<Shape>();
        for (const auto& item : core.items) {
            if (!item.alias.empty()) scope->aliases.insert(item.alias);
        }
        for (const auto& item : core.items) {
            const Expr& e = *item.expr;
            if (e.kind == ExprKind::Star) {
                expand_star(e, *scope, *shape);
                continue;
            }
            analyze_expr(e, *scope, Clause::Select, env);
            if (!item.alias.empty()) {
                shape->columns.insert(item.alias);
            } else if (e.kind == ExprKind::Column) {
                shape->columns.insert(e.name);
            }
        }
        if (core.where) analyze_expr(*core.where, *scope, Clause::Where, env);
        for (const auto& g : core.group_by) analyze_expr(*g, *scope, Clause::GroupBy, env);
        if (core.having) analyze_expr(*core.having, *scope, Clause::Having, env);
        return TermResult{shape, scope};
    }

    void expand_star(const Expr& star, const Scope& scope, Shape& shape) {
        if (star.qualifier.empty()) {
            for (const auto& src : scope.sources) {
                shape.passthrough.push_back(src);
                record_all_columns(*src);
            }
            return;
        }
        for (const auto& src : scope.sources) {
            if (binding_matches(*src, star.qualifier)) {
                shape.passthrough.push_back(src);
                record_all_columns(*src);
                return;
            }
        }
        problem(DiagnosticKind::UnknownTable, star.qualifier, "no table named " + star.qualifier + " in scope",
                star.span);
        result_.lineage.unresolved_columns.insert(star.qualifier + ".*");
    }

    /// SELECT * reads every column of a known base table.
    void record_all_columns(const Source& src) {
        if (!src.derived) {
            if (src.schema) {
                for (const auto& f : src.schema->fields) result_.lineage.fields.insert(ColumnRef{src.table, f.name});
            }
            return;
        }
        for (const auto& p : src.shape->passthrough) record_all_columns(*p);
    }

    void add_table_ref(const TableRef& ref, Scope& scope, const Scope* outer, const CteEnv* env) {
        switch (ref.kind) {
            case TableRef::Kind::Join:
                scope.using_columns.insert(ref.using_columns.begin(), ref.using_columns.end());
                add_table_ref(*ref.left, scope, outer, env);
                add_table_ref(*ref.right, scope, outer, env);
                return;
            case TableRef::Kind::Derived: {
                auto src = std::make_shared<Source>();
                src->derived = true;
                src->binding = ref.alias;
                src->shape = analyze_query(*ref.subquery, outer, env);
                scope.sources.push_back(std::move(src));
                return;
            }
            case TableRef::Kind::Base: break;
        }
        auto src = std::make_shared<Source>();
        src->binding = ref.alias.empty() ? last_segment(ref.name) : ref.alias;
        if (ref.alias.empty()) src->alt_binding = ref.name;
        if (ref.name.find('.') == std::string::npos) {
            if (auto cte = env->find(ref.name)) {
                src->derived = true;
                src->shape = cte;
                scope.sources.push_back(std::move(src));
                return;
            }
        }
        if (catalog_) {
            src->schema = catalog_->find_table(ref.name);
            if (!src->schema) {
                problem(DiagnosticKind::UnknownTable, ref.name, "table " + ref.name + " does not exist", ref.span);
            }
        }
        src->table = src->schema ? src->schema->table_name : ref.name;
        result_.lineage.tables.insert(src->table);
        scope.sources.push_back(std::move(src));
    }

    void analyze_join_conditions(const TableRef& ref, const Scope& scope, const CteEnv* env) {
        if (ref.kind != TableRef::Kind::Join) return;
        analyze_join_conditions(*ref.left, scope, env);
        analyze_join_conditions(*ref.right, scope, env);
        if (ref.on) analyze_expr(*ref.on, scope, Clause::On, env);
        for (const auto& col : ref.using_columns) {
            std::vector<SourcePtr> sides[2];
            collect_bindings(*ref.left, scope, sides[0]);
            collect_bindings(*ref.right, scope, sides[1]);
            for (auto& side : sides) {
                Scope side_scope;
                side_scope.sources = side;
                resolve_unqualified_and_record(col, side_scope, Clause::On, ref.span, /*search_outer=*/false);
            }
        }
    }

    /// Finds the scope sources created for `ref` by matching bindings.
    void collect_bindings(const TableRef& ref, const Scope& scope, std::vector<SourcePtr>& out) {
        if (ref.kind == TableRef::Kind::Join) {
            collect_bindings(*ref.left, scope, out);
            collect_bindings(*ref.right, scope, out);
            return;
        }
        std::string binding = ref.alias.empty() ? last_segment(ref.name) : ref.alias;
        for (const auto& src : scope.sources) {
            if (iequals(src->binding, binding)) {
                out.push_back(src);
                return;
            }
        }
    }

    void analyze_expr(const Expr& e, const Scope& scope, Clause clause, const CteEnv* env) {
        switch (e.kind) {
            case ExprKind::Column:
                if (e.qualifier.empty()) {
                    resolve_unqualified_and_record(e.name, scope, clause, e.span, true);
                } else {
                    resolve_qualified_and_record(e, scope);
                }
                return;
            case ExprKind::Star:
            case ExprKind::Literal: return;
            case ExprKind::InSubquery:
            case ExprKind::Exists:
            case ExprKind::Subquery:
                for (const auto& a : e.args) analyze_expr(*a, scope, clause, env);
                analyze_query(*e.subquery, &scope, env);
                return;
            default: break;
        }
        if (e.case_operand) analyze_expr(*e.case_operand, scope, clause, env);
        for (const auto& a : e.args) analyze_expr(*a, scope, clause, env);
        if (e.else_expr) analyze_expr(*e.else_expr, scope, clause, env);
        for (const auto& p : e.partition_by) analyze_expr(*p, scope, clause, env);
        for (const auto& o : e.window_order) analyze_expr(*o.expr, scope, clause, env);
    }

    void record(const Resolution& r, std::string_view display) {
        if (r.ambiguous || !r.ref) {
            if (r.ambiguous) result_.lineage.unresolved_columns.insert(std::string(display));
            return;
        }
        result_.lineage.fields.insert(*r.ref);
    }

    void resolve_unqualified_and_record(const std::string& column, const Scope& scope, Clause clause, Span span,
                                        bool search_outer) {
        const bool alias_visible =
            (clause == Clause::OrderBy || clause == Clause::GroupBy || clause == Clause::Having) &&
            scope.aliases.count(column);
        if (alias_visible && clause == Clause::OrderBy) return;
        for (const Scope* s = &scope; s; s = search_outer ? s->parent : nullptr) {
            std::vector<Resolution> definite;
            std::vector<Resolution> maybe;
            for (const auto& src : s->sources) {
                Resolution r = resolve_in_source(*src, column);
                if (r.found == Found::Definite) definite.push_back(r);
                if (r.found == Found::Maybe) maybe.push_back(r);
            }
            if (definite.size() == 1) {
                record(definite.front(), column);
                return;
            }
            if (definite.size() > 1) {
                if (s->using_columns.count(column)) {
                    for (const auto& r : definite) record(r, column);
                } else {
                    result_.lineage.unresolved_columns.insert(column);
                }
                return;
            }
            if (alias_visible && s == &scope) return;
            if (maybe.size() == 1) {
                record(maybe.front(), column);
                return;
            }
            if (maybe.size() > 1 && s->using_columns.count(column)) {
                for (const auto& r : maybe) record(r, column);
                return;
            }
            if (maybe.size() > 1) {
                result_.lineage.unresolved_columns.insert(column);
                return;
            }
            if (!search_outer) break;
        }
        if (alias_visible) return;
        result_.lineage.unresolved_columns.insert(column);
        problem(DiagnosticKind::UnknownColumn, column, "column " + column + " does not exist in any table in scope",
                span);
    }

    void resolve_qualified_and_record(const Expr& e, const Scope& scope) {
        const std::string display = e.qualifier + "." + e.name;
        for (const Scope* s = &scope; s; s = s->parent) {
            for (const auto& src : s->sources) {
                if (!binding_matches(*src, e.qualifier)) continue;
                Resolution r = resolve_in_source(*src, e.name);
                if (r.found == Found::No) {
                    result_.lineage.unresolved_columns.insert(display);
                    problem(DiagnosticKind::UnknownColumn, display,
                            "column " + e.name + " does not exist in " + e.qualifier, e.span);
                    return;
                }
                record(r, display);
                return;
            }
        }
        result_.lineage.unresolved_columns.insert(display);
        problem(DiagnosticKind::UnknownColumn, display, "no table named " + e.qualifier + " in scope", e.span);
    }

    const Catalog* catalog_;
    Analysis result_;
    std::deque<std::unique_ptr<Scope>> scopes_;
    std::deque<std::unique_ptr<CteEnv>> envs_;
};

}  // namespace

Analysis analyze(const Statement& statement, const Catalog* catalog) {
    Analyzer analyzer(catalog);
    return analyzer.run(statement);
}

Lineage extract_lineage(const Statement& statement, const Catalog* catalog) {
    return analyze(statement, catalog).lineage;
}

Lineage extract_lineage(std::string_view sql, Dialect dialect, const Catalog* catalog) {
    ParseResult parsed = parse(sql, dialect);
    if (!parsed) throw Error(ErrorKind::NotParsed, parsed.diagnostic().message());
    return extract_lineage(parsed.statement(), catalog);
}

std::vector<SqlDiagnostic> validate(std::string_view sql, Dialect dialect, const Catalog& catalog) {
    ParseResult parsed = parse(sql, dialect);
    if (!parsed) return {parsed.diagnostic()};
    Analysis analysis = analyze(parsed.statement(), &catalog);
    std::vector<SqlDiagnostic> out;
    for (auto& p : analysis.problems) {
        if (is_permissive(dialect) && p.kind == DiagnosticKind::UnknownColumn) continue;
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace askdata::sql
