#include "askdata/sql/canonical.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <vector>

#include "askdata/sql/parser.hpp"

namespace askdata::sql {

namespace {

std::string number_text(const std::string& raw) {
    char* end = nullptr;
    double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || !std::isfinite(v)) return raw;
    char buf[64];
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    } else {
        std::snprintf(buf, sizeof buf, "%.17g", v);
    }
    return buf;
}

std::string quote_string(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "''";
        else out.push_back(c);
    }
    out += "'";
    return out;
}

std::string last_segment(const std::string& name) {
    auto dot = name.rfind('.');
    return dot == std::string::npos ? name : name.substr(dot + 1);
}

struct Frame {
    std::map<std::string, std::string> qualifiers;  // lower binding -> printed qualifier
    bool single_source = false;
    std::map<std::string, std::string> select_aliases;  // lower alias -> canonical expr
};

class Printer {
public:
    std::string statement(const Statement& s) {
        std::string out;
        if (s.kind == Statement::Kind::CreateView) out += "CREATE VIEW " + to_lower(s.view_name) + " AS ";
        out += query(*s.query, /*top=*/true);
        return out;
    }

private:
    std::string query(const Query& q, bool top) {
        std::string out;
        if (!q.ctes.empty()) {
            out += q.recursive ? "WITH RECURSIVE " : "WITH ";
            for (size_t i = 0; i < q.ctes.size(); ++i) {
                const auto& cte = q.ctes[i];
                if (i) out += ", ";
                out += to_lower(cte.name);
                if (!cte.columns.empty()) {
                    out += "(";
                    for (size_t j = 0; j < cte.columns.size(); ++j) {
                        if (j) out += ", ";
                        out += to_lower(cte.columns[j]);
                    }
                    out += ")";
                }
                out += " AS (" + query(*cte.query, false) + ")";
            }
            out += " ";
        }
        // ORDER BY of a single SELECT is printed inside that SELECT's frame so
        // qualifiers and aliases resolve the same way as in the body.
        const bool single = q.rest.empty() && q.first.select;
        out += term(q.first, top && q.rest.empty(), single ? &q : nullptr);
        for (const auto& [op, t] : q.rest) {
            switch (op) {
                case SetOp::Union: out += " UNION "; break;
                case SetOp::UnionAll: out += " UNION ALL "; break;
                case SetOp::Intersect: out += " INTERSECT "; break;
                case SetOp::Except: out += " EXCEPT "; break;
            }
            out += term(t, false, nullptr);
        }
        if (!single) out += order_limit(q);
        return out;
    }

    std::string order_limit(const Query& q) {
        std::string out;
        if (!q.order_by.empty()) {
            out += " ORDER BY ";
            for (size_t i = 0; i < q.order_by.size(); ++i) {
                if (i) out += ", ";
                out += expr(*q.order_by[i].expr, /*alias_clause=*/true);
                if (q.order_by[i].descending) out += " DESC";
            }
        }
        if (q.limit) out += " LIMIT " + expr(*q.limit, false);
        if (q.offset) out += " OFFSET " + expr(*q.offset, false);
        return out;
    }

    std::string term(const QueryTerm& t, bool top, const Query* owner) {
        if (t.nested) return "(" + query(*t.nested, false) + ")";
        return select(*t.select, top, owner);
    }

    void collect_bindings(const TableRef& ref, std::vector<const TableRef*>& out) {
        if (ref.kind == TableRef::Kind::Join) {
            collect_bindings(*ref.left, out);
            collect_bindings(*ref.right, out);
            return;
        }
        out.push_back(&ref);
    }

    std::string select(const SelectCore& core, bool top, const Query* owner) {
        Frame frame;
        std::vector<const TableRef*> leaves;
        for (const auto& ref : core.from) collect_bindings(*ref, leaves);
        std::map<std::string, int> occurrences;
        for (const auto* leaf : leaves) {
            if (leaf->kind == TableRef::Kind::Base) ++occurrences[to_lower(leaf->name)];
        }
        for (const auto* leaf : leaves) {
            if (leaf->kind == TableRef::Kind::Base) {
                std::string lname = to_lower(leaf->name);
                bool unique = occurrences[lname] == 1;
                std::string printed = unique ? lname : to_lower(leaf->alias.empty() ? last_segment(leaf->name) : leaf->alias);
                std::string binding = to_lower(leaf->alias.empty() ? last_segment(leaf->name) : leaf->alias);
                frame.qualifiers[binding] = printed;
                if (leaf->alias.empty()) frame.qualifiers[lname] = printed;
            } else if (!leaf->alias.empty()) {
                frame.qualifiers[to_lower(leaf->alias)] = to_lower(leaf->alias);
            }
        }
        frame.single_source = leaves.size() == 1;
        frames_.push_back(frame);

        std::string out = "SELECT ";
        if (core.distinct) out += "DISTINCT ";
        std::vector<std::string> items;
        for (const auto& item : core.items) {
            std::string e = expr(*item.expr, false);
            if (top && !item.alias.empty()) {
                frames_.back().select_aliases[to_lower(item.alias)] = e;
            } else if (!item.alias.empty()) {
                e += " AS " + to_lower(item.alias);
            }
            items.push_back(std::move(e));
        }
        if (!top) {
            for (const auto& item : core.items) {
                if (!item.alias.empty()) frames_.back().select_aliases.erase(to_lower(item.alias));
            }
        }
        out += join(items, ", ");
        if (!core.from.empty()) {
            out += " FROM ";
            for (size_t i = 0; i < core.from.size(); ++i) {
                if (i) out += ", ";
                out += table_ref(*core.from[i]);
            }
        }
        if (core.where) out += " WHERE " + expr(*core.where, false);
        if (!core.group_by.empty()) {
            out += " GROUP BY ";
            for (size_t i = 0; i < core.group_by.size(); ++i) {
                if (i) out += ", ";
                out += expr(*core.group_by[i], true);
            }
        }
        if (core.having) out += " HAVING " + expr(*core.having, true);
        if (owner) out += order_limit(*owner);
        frames_.pop_back();
        return out;
    }

    std::string table_ref(const TableRef& ref) {
        switch (ref.kind) {
            case TableRef::Kind::Base: {
                std::string lname = to_lower(ref.name);
                const std::string& printed = frames_.back().qualifiers[to_lower(
                    ref.alias.empty() ? last_segment(ref.name) : ref.alias)];
                return printed == lname ? lname : lname + " " + printed;
            }
            case TableRef::Kind::Derived: {
                std::string out = "(" + query(*ref.subquery, false) + ")";
                if (!ref.alias.empty()) out += " " + to_lower(ref.alias);
                return out;
            }
            case TableRef::Kind::Join: {
                std::string out = table_ref(*ref.left);
                if (ref.natural) out += " NATURAL";
                switch (ref.join) {
                    case JoinType::Inner: out += " JOIN "; break;
                    case JoinType::Left: out += " LEFT JOIN "; break;
                    case JoinType::Right: out += " RIGHT JOIN "; break;
                    case JoinType::Full: out += " FULL JOIN "; break;
                    case JoinType::Cross: out += " CROSS JOIN "; break;
                    case JoinType::Comma: out += ", "; break;
                }
                out += table_ref(*ref.right);
                if (ref.on) out += " ON " + expr(*ref.on, false);
                if (!ref.using_columns.empty()) {
                    out += " USING (";
                    for (size_t i = 0; i < ref.using_columns.size(); ++i) {
                        if (i) out += ", ";
                        out += to_lower(ref.using_columns[i]);
                    }
                    out += ")";
                }
                return out;
            }
        }
        return {};
    }

    std::string qualified(const std::string& qualifier, const std::string& name) {
        std::string lq = to_lower(qualifier);
        for (size_t i = frames_.size(); i-- > 0;) {
            auto it = frames_[i].qualifiers.find(lq);
            if (it == frames_[i].qualifiers.end()) it = frames_[i].qualifiers.find(last_segment(lq));
            if (it == frames_[i].qualifiers.end()) continue;
            if (i + 1 == frames_.size() && frames_[i].single_source) return to_lower(name);
            return it->second + "." + to_lower(name);
        }
        return lq + "." + to_lower(name);
    }

    std::string expr(const Expr& e, bool alias_clause) {
        auto sub = [&](const ExprPtr& p) { return expr(*p, alias_clause); };
        switch (e.kind) {
            case ExprKind::Literal:
                switch (e.literal) {
                    case LiteralKind::Number: return number_text(e.op);
                    case LiteralKind::String: return quote_string(e.op);
                    case LiteralKind::Null: return "NULL";
                    case LiteralKind::Boolean: return to_upper(e.op);
                }
                return e.op;
            case ExprKind::Column: {
                if (e.qualifier.empty()) {
                    if (alias_clause && !frames_.empty()) {
                        auto it = frames_.back().select_aliases.find(to_lower(e.name));
                        if (it != frames_.back().select_aliases.end()) return it->second;
                    }
                    return to_lower(e.name);
                }
                return qualified(e.qualifier, e.name);
            }
            case ExprKind::Star:
                return e.qualifier.empty() ? "*" : qualified(e.qualifier, "*");
            case ExprKind::Unary:
                if (e.op == "NOT") return "(NOT " + sub(e.args[0]) + ")";
                return "(" + e.op + sub(e.args[0]) + ")";
            case ExprKind::Binary: return "(" + sub(e.args[0]) + " " + e.op + " " + sub(e.args[1]) + ")";
            case ExprKind::Function: {
                if (e.name == "niladic") return to_upper(e.op);
                std::string out = to_upper(e.op) + "(";
                if (e.distinct) out += "DISTINCT ";
                for (size_t i = 0; i < e.args.size(); ++i) {
                    if (i) out += ", ";
                    out += sub(e.args[i]);
                }
                out += ")";
                if (e.windowed) {
                    out += " OVER (";
                    if (!e.partition_by.empty()) {
                        out += "PARTITION BY ";
                        for (size_t i = 0; i < e.partition_by.size(); ++i) {
                            if (i) out += ", ";
                            out += sub(e.partition_by[i]);
                        }
                    }
                    if (!e.window_order.empty()) {
                        out += e.partition_by.empty() ? "ORDER BY " : " ORDER BY ";
                        for (size_t i = 0; i < e.window_order.size(); ++i) {
                            if (i) out += ", ";
                            out += sub(e.window_order[i].expr);
                            if (e.window_order[i].descending) out += " DESC";
                        }
                    }
                    out += ")";
                }
                return out;
            }
            case ExprKind::Case: {
                std::string out = "CASE";
                if (e.case_operand) out += " " + sub(e.case_operand);
                for (size_t i = 0; i + 1 < e.args.size(); i += 2) {
                    out += " WHEN " + sub(e.args[i]) + " THEN " + sub(e.args[i + 1]);
                }
                if (e.else_expr) out += " ELSE " + sub(e.else_expr);
                return out + " END";
            }
            case ExprKind::Cast: return "CAST(" + sub(e.args[0]) + " AS " + to_upper(e.name) + ")";
            case ExprKind::InList: {
                std::string out = "(" + sub(e.args[0]) + (e.negated ? " NOT IN (" : " IN (");
                for (size_t i = 1; i < e.args.size(); ++i) {
                    if (i > 1) out += ", ";
                    out += sub(e.args[i]);
                }
                return out + "))";
            }
            case ExprKind::InSubquery:
                return "(" + sub(e.args[0]) + (e.negated ? " NOT IN (" : " IN (") + query(*e.subquery, false) + "))";
            case ExprKind::Between:
                return "(" + sub(e.args[0]) + (e.negated ? " NOT BETWEEN " : " BETWEEN ") + sub(e.args[1]) + " AND " +
                       sub(e.args[2]) + ")";
            case ExprKind::Like:
                return "(" + sub(e.args[0]) + (e.negated ? " NOT " : " ") + to_upper(e.op) + " " + sub(e.args[1]) + ")";
            case ExprKind::IsNull: return "(" + sub(e.args[0]) + (e.negated ? " IS NOT NULL)" : " IS NULL)");
            case ExprKind::Exists: return std::string(e.negated ? "(NOT EXISTS (" : "(EXISTS (") + query(*e.subquery, false) + "))";
            case ExprKind::Subquery: return "(" + query(*e.subquery, false) + ")";
            case ExprKind::Subscript: return sub(e.args[0]) + "[" + sub(e.args[1]) + "]";
        }
        return {};
    }

    std::vector<Frame> frames_;
};

}  // namespace

std::string canonical_form(const Statement& statement) {
    Printer printer;
    return printer.statement(statement);
}

std::optional<std::string> canonical_form(std::string_view sql, Dialect dialect) {
    ParseResult parsed = parse(sql, dialect);
    if (!parsed) return std::nullopt;
    return canonical_form(parsed.statement());
}

}  // namespace askdata::sql
