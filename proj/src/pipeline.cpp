#include "askdata/pipeline.hpp"

#include <algorithm>

#include "askdata/sql/lineage.hpp"
#include "askdata/synthesizer.hpp"

namespace askdata {

nlohmann::json StageRecord::to_json() const {
    return {{"stage", stage},
            {"input_digest", input_digest},
            {"output_digest", output_digest},
            {"elapsed_us", elapsed_us},
            {"verdict", verdict},
            {"detail", detail}};
}

std::vector<std::string> PipelineTrace::stage_names() const {
    std::vector<std::string> out;
    for (const auto& s : stages) out.push_back(s.stage);
    return out;
}

bool PipelineTrace::execution_follows_allow() const {
    bool allowed = false;
    for (const auto& s : stages) {
        if (s.stage == "authorize") allowed = s.verdict == "allow";
        if (s.stage == "execute" && !allowed) return false;
    }
    return true;
}

bool PipelineTrace::reflection_only_after_diagnostics() const {
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (stages[i].stage != "reflect") continue;
        if (i == 0 || stages[i - 1].stage != "validate" || stages[i - 1].verdict != "diagnostics") return false;
    }
    return true;
}

nlohmann::json PipelineTrace::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : stages) arr.push_back(s.to_json());
    return {{"trace_id", trace_id}, {"stages", arr}};
}

PipelineTrace PipelineTrace::from_json(const nlohmann::json& j) {
    PipelineTrace t;
    t.trace_id = j.at("trace_id").get<std::string>();
    for (const auto& s : j.at("stages")) {
        StageRecord r;
        r.stage = s.at("stage").get<std::string>();
        r.input_digest = s.value("input_digest", "");
        r.output_digest = s.value("output_digest", "");
        r.elapsed_us = s.value("elapsed_us", std::int64_t{0});
        r.verdict = s.value("verdict", "");
        r.detail = s.value("detail", nlohmann::json::object());
        t.stages.push_back(std::move(r));
    }
    return t;
}

nlohmann::json ClarificationRequest::to_json() const {
    return {{"kind", kind}, {"subject", subject}, {"acceptable_values", acceptable_values}, {"message", message}};
}

std::string_view to_string(OutcomeKind kind) {
    switch (kind) {
        case OutcomeKind::Answer: return "answer";
        case OutcomeKind::Clarification: return "clarification";
        case OutcomeKind::Refusal: return "refusal";
    }
    return "answer";
}

nlohmann::json TurnOutcome::to_json() const {
    nlohmann::json j{{"kind", to_string(kind)},
                     {"question", question},
                     {"completed_question", completed_question},
                     {"sql", nullptr},
                     {"result", nullptr},
                     {"narrative", narrative},
                     {"chart", nullptr},
                     {"chart_type", nullptr},
                     {"clarification", nullptr},
                     {"refusal", nullptr},
                     {"trace_id", trace.trace_id}};
    if (sql) j["sql"] = *sql;
    if (result) j["result"] = result->to_json();
    if (chart) {
        j["chart"] = chart->to_json();
        j["chart_type"] = to_string(chart->chart_type);
    }
    if (clarification) j["clarification"] = clarification->to_json();
    if (kind == OutcomeKind::Refusal) j["refusal"] = {{"stage", refusal_stage}, {"reason", refusal_reason}};
    return j;
}

Pipeline::Pipeline(std::shared_ptr<const Catalog> catalog, std::shared_ptr<MemoryStore> store,
                   std::shared_ptr<LlmGateway> llm, std::shared_ptr<ConnectionRegistry> connections,
                   std::map<std::string, DomainSettings> domains, PipelineOptions options,
                   std::shared_ptr<const Clock> clock)
    : catalog_(std::move(catalog)), store_(std::move(store)), llm_(std::move(llm)),
      connections_(std::move(connections)), domains_(std::move(domains)), options_(std::move(options)),
      clock_(std::move(clock)) {}

const DomainSettings& Pipeline::domain_settings(const std::string& domain_id) const {
    static const DomainSettings none;
    auto it = domains_.find(domain_id);
    return it == domains_.end() ? none : it->second;
}

std::shared_ptr<Connection> Pipeline::connection_for(const std::string& domain_id) const {
    const auto& settings = domain_settings(domain_id);
    for (const auto& name : {settings.connection, domain_id, std::string("default")}) {
        if (!name.empty() && connections_->has(name)) return connections_->get(name);
    }
    throw Error(ErrorKind::NotConfigured, "no connection profile for domain " + domain_id);
}

namespace {

std::string digest(const nlohmann::json& j) { return hex_digest(j.dump()); }

class Recorder {
public:
    Recorder(const Clock& clock, PipelineTrace& trace, std::chrono::milliseconds deadline)
        : clock_(clock), trace_(trace), deadline_(deadline), started_(clock.now()) {}

    void begin(const std::string& stage, const nlohmann::json& input) {
        StageRecord r;
        r.stage = stage;
        r.input_digest = digest(input);
        trace_.stages.push_back(std::move(r));
        stage_started_ = clock_.now();
        if (stage_started_ - started_ > deadline_) throw Error(ErrorKind::Timeout, "turn deadline exceeded");
    }

    void end(const std::string& verdict, nlohmann::json detail) {
        auto& r = trace_.stages.back();
        r.verdict = verdict;
        r.output_digest = digest(detail);
        r.detail = std::move(detail);
        r.elapsed_us = std::chrono::duration_cast<std::chrono::microseconds>(clock_.now() - stage_started_).count();
    }

    /// Closes an open stage as failed.
    void fail(const std::string& message) {
        if (trace_.stages.empty()) return;
        auto& r = trace_.stages.back();
        if (!r.verdict.empty()) return;
        end("error", {{"error", message}});
    }

    std::string current() const { return trace_.stages.empty() ? "intent" : trace_.stages.back().stage; }

private:
    const Clock& clock_;
    PipelineTrace& trace_;
    std::chrono::milliseconds deadline_;
    std::chrono::nanoseconds started_;
    std::chrono::nanoseconds stage_started_{0};
};

nlohmann::json diagnostics_json(const std::vector<sql::SqlDiagnostic>& diags) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : diags) arr.push_back(d.message());
    return arr;
}

const ClarificationParameter* find_parameter(const DomainSettings& s, const std::string& name) {
    for (const auto& p : s.parameters) {
        if (iequals(p.name, name)) return &p;
    }
    return nullptr;
}

}  // namespace

TurnOutcome Pipeline::run(const std::string& user_id, const std::string& domain_id, SessionContext& session,
                          const std::string& question) {
    if (!catalog_->has_domain(domain_id)) throw Error(ErrorKind::UnknownDomain, domain_id);
    const DomainSettings& settings = domain_settings(domain_id);
    LlmGateway& llm = *llm_;
    ++session.turn;

    TurnOutcome out;
    out.question = question;
    out.completed_question = question;
    out.trace.trace_id =
        hex_digest(session.trace_scope + "\x1f" + std::to_string(session.turn) + "\x1f" + domain_id + "\x1f" + question);
    Recorder rec(*clock_, out.trace, options_.deadline);

    auto refuse = [&](const std::string& stage, const std::string& reason) {
        out.kind = OutcomeKind::Refusal;
        out.refusal_stage = stage;
        out.refusal_reason = reason;
        return out;
    };
    auto clarify = [&](ClarificationRequest request) {
        out.kind = OutcomeKind::Clarification;
        out.clarification = std::move(request);
        return out;
    };

    try {
        Dialect dialect = catalog_->domain_dialect(domain_id);

        rec.begin("intent", {{"question", question}, {"history", session.history}});
        std::vector<std::string> parameter_names;
        for (const auto& p : settings.parameters) parameter_names.push_back(p.name);
        auto nearby = store_->search(question, 3, domain_id);
        IntentDecision decision = decide_intent(llm, domain_id, session.history, question, nearby, parameter_names);
        out.completed_question = decision.completed_question;
        if (!decision.relevant) {
            rec.end("refused", decision.to_json());
            return refuse("intent", "the question is not related to the " + domain_id + " domain");
        }
        for (const auto& [name, value] : decision.parameters) {
            const ClarificationParameter* p = find_parameter(settings, name);
            if (!p) continue;
            auto confirmed = session.resolved_parameters.find(p->name);
            if (confirmed != session.resolved_parameters.end() && iequals(confirmed->second, value)) continue;
            bool acceptable = std::any_of(p->acceptable_values.begin(), p->acceptable_values.end(),
                                          [&](const std::string& v) { return iequals(v, value); });
            if (acceptable) continue;
            rec.end("clarify", decision.to_json());
            return clarify({"parameter", p->name, p->acceptable_values,
                            "Which " + p->name + " do you mean? Choose one of: " + join(p->acceptable_values, ", ")});
        }
        rec.end("ok", decision.to_json());
        const std::string& completed = out.completed_question;

        if (decision.direct_plot && session.last_result) {
            rec.begin("resultgen", {{"direct_plot", true}, {"question", session.last_question}});
            out.chart = make_chart(llm, session.last_question, decision.chart_hint, *session.last_result,
                                   session.last_question);
            out.sql = session.last_sql;
            out.result = session.last_result;
            rec.end("ok", {{"direct_plot", true}, {"chart", out.chart->to_json()}});
            return out;
        }

        rec.begin("recall", {{"question", completed}});
        auto candidates = multi_recall(completed, domain_id, *catalog_, *store_, options_.recall);
        RecallBundle bundle;
        if (!options_.zero_shot) {
            bundle = hybrid_recall(options_.slot_features ? &llm : nullptr, *store_, completed, domain_id, options_.k);
        }
        nlohmann::json cand_json = nlohmann::json::array();
        for (const auto& c : candidates) {
            cand_json.push_back({{"table", c.table}, {"score", c.score}, {"channel", to_string(c.channel)}});
        }
        nlohmann::json recall_detail{{"candidates", cand_json}, {"bundle", bundle.to_json()}};
        if (candidates.empty()) {
            rec.end("clarify", recall_detail);
            return clarify({"rephrase", "", {},
                            "No table of the " + domain_id + " domain matches the question; please rephrase it."});
        }
        rec.end("ok", recall_detail);

        rec.begin("schema_link", {{"question", completed}, {"candidates", cand_json}});
        std::vector<TableSchema> schemas;
        for (const auto& c : candidates) {
            if (auto s = catalog_->find_table(c.table)) schemas.push_back(*s);
        }
        SchemaLink link = schema_link(llm, completed, schemas, bundle.examples);
        std::vector<std::string> known;
        for (const auto& [metric, formula] : session.knowledge) known.push_back(metric);
        auto gap = knowledge_gap(completed, link, bundle.examples, settings.metric_lexicon, known);
        nlohmann::json link_detail{{"link", link.to_json()}, {"warnings", link.warnings}};
        if (gap) {
            link_detail["knowledge_gap"] = *gap;
            rec.end("clarify", link_detail);
            return clarify({"formula", *gap, {}, "How should \"" + *gap + "\" be computed? Please give the formula."});
        }
        rec.end("ok", link_detail);

        GenerationContext gen;
        gen.dialect = dialect;
        gen.question = completed;
        gen.schema_info = linked_schema_info(schemas, link);
        gen.examples = bundle.examples;
        gen.kernel_id = bundle.kernel_id;
        for (const auto& kv : session.knowledge) gen.knowledge.push_back(kv);
        gen.token_budget = options_.token_budget;
        rec.begin("generate", {{"question", completed}, {"schema_info", gen.schema_info}});
        std::vector<RecallHit> kept;
        std::string sql = generate_sql(llm, gen, &kept);
        nlohmann::json kept_ids = nlohmann::json::array();
        for (const auto& h : kept) kept_ids.push_back(h.demonstration.id);
        rec.end("ok", {{"sql", sql}, {"examples", kept_ids}});

        rec.begin("validate", {{"sql", sql}});
        auto diags = sql::validate(sql, dialect, *catalog_);
        rec.end(diags.empty() ? "clean" : "diagnostics", {{"diagnostics", diagnostics_json(diags)}});
        if (!diags.empty()) {
            if (!options_.reflection) return refuse("validate", trim(format_diagnostics(diags)));
            rec.begin("reflect", {{"sql", sql}, {"diagnostics", diagnostics_json(diags)}});
            try {
                auto fixed = reflect(llm, completed, sql, diags, gen.schema_info, dialect, *catalog_,
                                     options_.max_reflection_rounds);
                sql = fixed.sql;
                rec.end("ok", {{"sql", sql}, {"rounds", fixed.rounds}});
            } catch (const ReflectionFailedError& e) {
                rec.end("error", {{"error", e.what()}, {"diagnostics", diagnostics_json(e.diagnostics())}});
                return refuse("reflect", e.what());
            }
        }
        out.sql = sql;

        rec.begin("authorize", {{"user", user_id}, {"sql", sql}});
        AuthVerdict verdict = authorize(user_id, sql, dialect, *catalog_);
        nlohmann::json missing = nlohmann::json::array();
        for (const auto& m : verdict.missing) missing.push_back(m.table + "." + m.column);
        rec.end(verdict.allowed ? "allow" : "deny", {{"missing", missing}, {"reason", verdict.reason}});
        if (!verdict.allowed) return refuse("authorize", verdict.reason);

        rec.begin("execute", {{"sql", sql}});
        auto connection = connection_for(domain_id);
        ExecutionResult result = execute_sql(*connection, sql, options_.row_limit);
        rec.end("ok", {{"columns", result.columns}, {"row_count", result.row_count}, {"truncated", result.truncated}});
        out.result = result;

        rec.begin("resultgen", {{"question", completed}, {"result", result.to_json()}});
        out.narrative = text_analysis(llm, completed, result);
        nlohmann::json gen_detail{{"narrative", out.narrative}};
        if (decision.chart_hint) {
            try {
                out.chart = make_chart(llm, completed, decision.chart_hint, result, completed);
                gen_detail["chart"] = out.chart->to_json();
            } catch (const Error& e) {
                gen_detail["chart_error"] = e.what();
            }
        }
        rec.end("ok", gen_detail);

        session.history.push_back(completed);
        session.last_result = result;
        session.last_sql = sql;
        session.last_question = completed;
        return out;
    } catch (const std::exception& e) {
        std::string stage = rec.current();
        rec.fail(e.what());
        return refuse(stage, e.what());
    }
}

}  // namespace askdata
