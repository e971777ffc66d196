#include "askdata/synthesizer.hpp"

#include <algorithm>

#include "askdata/sql/lineage.hpp"

namespace askdata {

std::string format_sql_examples(const std::vector<RecallHit>& examples) {
    std::string out;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        std::string n = std::to_string(i + 1);
        out += "--Query" + n + ": " + examples[i].demonstration.query + "\n--SQL" + n + ": \n" +
               trim(examples[i].demonstration.sql) + "\n";
    }
    return out;
}

namespace {

Bindings generation_bindings(const GenerationContext& ctx, const std::vector<RecallHit>& examples) {
    std::string schema = ctx.schema_info;
    if (!ctx.knowledge.empty()) {
        schema += "\n[knowledge]:\n";
        for (const auto& [metric, formula] : ctx.knowledge) schema += "- " + metric + ": " + formula + "\n";
    }
    return {{"dialect", std::string(to_string(ctx.dialect))},
            {"schema_info", schema},
            {"examples", format_sql_examples(examples)},
            {"query", ctx.question}};
}

bool is_kernel(const GenerationContext& ctx, const RecallHit& h) {
    return (ctx.kernel_id && h.demonstration.id == *ctx.kernel_id) || h.channel == Channel::SlotKernel;
}

std::string fenced_sql(const std::string& text) {
    std::string sql = extract_fenced(text, "sql");
    if (sql.empty()) throw Error(ErrorKind::LlmMalformedOutput, "empty SQL block");
    return sql;
}

}  // namespace

PreparedGeneration fit_generation_budget(const GenerationContext& ctx, const PromptRegistry& registry) {
    std::vector<RecallHit> kept = ctx.examples;
    while (true) {
        PreparedGeneration p;
        p.bindings = generation_bindings(ctx, kept);
        p.estimated_tokens = estimate_tokens(registry.render(prompts::kSqlGeneration, p.bindings));
        if (p.estimated_tokens <= ctx.token_budget) {
            p.kept = std::move(kept);
            return p;
        }
        if (kept.empty()) {
            throw Error(ErrorKind::BudgetUnsatisfiable, "prompt needs " + std::to_string(p.estimated_tokens) +
                                                            " tokens without examples, budget is " +
                                                            std::to_string(ctx.token_budget));
        }
        auto victim = kept.end();
        for (auto it = kept.begin(); it != kept.end(); ++it) {
            if (is_kernel(ctx, *it)) continue;
            if (victim == kept.end() || it->score <= victim->score) victim = it;
        }
        if (victim == kept.end()) victim = kept.begin();
        kept.erase(victim);
    }
}

std::string generate_sql(LlmGateway& llm, const GenerationContext& ctx, std::vector<RecallHit>* kept) {
    PreparedGeneration p = fit_generation_budget(ctx, llm.registry());
    if (kept) *kept = p.kept;
    return llm.ask(prompts::kSqlGeneration, p.bindings, fenced_sql);
}

std::string format_diagnostics(const std::vector<sql::SqlDiagnostic>& diagnostics) {
    std::string out;
    for (const auto& d : diagnostics) out += "- " + d.message() + "\n";
    return out;
}

ReflectionFailedError::ReflectionFailedError(const std::string& message, std::vector<sql::SqlDiagnostic> diagnostics)
    : Error(ErrorKind::ReflectionFailed, message), diagnostics_(std::move(diagnostics)) {}

ReflectionOutcome reflect(LlmGateway& llm, const std::string& question, const std::string& sql,
                          const std::vector<sql::SqlDiagnostic>& diagnostics, const std::string& schema_info,
                          Dialect dialect, const Catalog& catalog, int max_rounds) {
    if (diagnostics.empty()) throw Error(ErrorKind::Internal, "reflection invoked on SQL without diagnostics");
    ReflectionOutcome out;
    out.sql = sql;
    auto current = diagnostics;
    for (int round = 0; round < max_rounds; ++round) {
        out.history.push_back(current);
        Bindings b{{"dialect", std::string(to_string(dialect))},
                   {"query", question},
                   {"sql", out.sql},
                   {"schema_info", schema_info},
                   {"diagnostics", format_diagnostics(current)}};
        try {
            out.sql = llm.ask(prompts::kSqlReflection, b, fenced_sql);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::LlmMalformedOutput) throw;
            throw ReflectionFailedError(std::string("reflection produced no SQL: ") + e.what(), current);
        }
        out.rounds = round + 1;
        current = sql::validate(out.sql, dialect, catalog);
        if (current.empty()) return out;
    }
    throw ReflectionFailedError("SQL still invalid after " + std::to_string(max_rounds) +
                                    " reflection rounds: " + trim(format_diagnostics(current)),
                                current);
}

AuthVerdict authorize(const std::string& user_id, const std::string& sql, Dialect dialect, const Catalog& catalog) {
    auto lineage = sql::extract_lineage(sql, dialect, &catalog);
    if (!lineage.unresolved_columns.empty()) {
        std::vector<std::string> names(lineage.unresolved_columns.begin(), lineage.unresolved_columns.end());
        return AuthVerdict::deny({}, "inadequate authorization: unresolved columns " + join(names, ", "));
    }
    AuthVerdict verdict = catalog.check_access(user_id, lineage.fields);
    std::vector<ColumnRef> missing = verdict.missing;
    for (const auto& table : lineage.tables) {
        bool named = std::any_of(lineage.fields.begin(), lineage.fields.end(),
                                 [&](const ColumnRef& f) { return iequals(f.table, table); });
        if (named) continue;
        auto schema = catalog.find_table(table);
        if (!schema) throw Error(ErrorKind::UnknownTable, table);
        bool any = std::any_of(schema->fields.begin(), schema->fields.end(), [&](const FieldSpec& f) {
            return catalog.check_access(user_id, {ColumnRef{schema->table_name, f.name}}).allowed;
        });
        if (!any) missing.push_back({schema->table_name, "*"});
    }
    if (missing.empty()) return AuthVerdict::allow();
    std::string reason = "inadequate authorization: missing grants on ";
    for (std::size_t i = 0; i < missing.size(); ++i) {
        if (i) reason += ", ";
        reason += missing[i].table + "." + missing[i].column;
    }
    return AuthVerdict::deny(std::move(missing), std::move(reason));
}

ExecutionResult execute_sql(Connection& connection, const std::string& sql, std::size_t row_limit) {
    return connection.execute(sql, row_limit);
}

}  // namespace askdata
