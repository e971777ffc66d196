#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "askdata/catalog.hpp"
#include "askdata/common.hpp"
#include "askdata/engine.hpp"
#include "askdata/llm.hpp"
#include "askdata/memory.hpp"
#include "askdata/planner.hpp"
#include "askdata/resultgen.hpp"

namespace askdata {

struct StageRecord {
    std::string stage;
    std::string input_digest;
    std::string output_digest;
    std::int64_t elapsed_us = 0;
    /// ok, allow, deny, clean, diagnostics, refused, clarify, error.
    std::string verdict;
    nlohmann::json detail = nlohmann::json::object();

    nlohmann::json to_json() const;
};

struct PipelineTrace {
    std::string trace_id;
    std::vector<StageRecord> stages;

    std::vector<std::string> stage_names() const;
    /// Every execute stage comes after an authorize stage with verdict allow.
    bool execution_follows_allow() const;
    /// Every reflect stage comes right after a validate stage that found
    /// diagnostics.
    bool reflection_only_after_diagnostics() const;
    nlohmann::json to_json() const;
    static PipelineTrace from_json(const nlohmann::json& j);
};

struct ClarificationParameter {
    std::string name;
    std::vector<std::string> acceptable_values;
};

struct DomainSettings {
    std::vector<ClarificationParameter> parameters;
    std::vector<std::string> metric_lexicon;
    /// Connection profile name; empty means the domain id, then "default".
    std::string connection;
};

struct ClarificationRequest {
    /// "parameter", "formula" or "rephrase".
    std::string kind;
    std::string subject;
    std::vector<std::string> acceptable_values;
    std::string message;

    nlohmann::json to_json() const;
};

enum class OutcomeKind { Answer, Clarification, Refusal };

std::string_view to_string(OutcomeKind kind);

struct TurnOutcome {
    OutcomeKind kind = OutcomeKind::Answer;
    std::string question;
    std::string completed_question;
    std::optional<std::string> sql;
    std::optional<ExecutionResult> result;
    std::string narrative;
    std::optional<ChartSpec> chart;
    std::optional<ClarificationRequest> clarification;
    std::string refusal_stage;
    std::string refusal_reason;
    PipelineTrace trace;

    /// The turn response body; the trace is referenced by id only.
    nlohmann::json to_json() const;
};

struct PipelineOptions {
    std::size_t k = 5;
    std::size_t token_budget = 3000;
    int max_reflection_rounds = 2;
    std::size_t row_limit = 1000;
    bool slot_features = true;
    bool reflection = true;
    /// Generate without recalled examples.
    bool zero_shot = false;
    MultiRecallOptions recall;
    std::chrono::milliseconds deadline{60000};
};

/// Conversation state carried between turns of one session.
struct SessionContext {
    /// Prefix of trace ids, unique per session.
    std::string trace_scope;
    std::size_t turn = 0;
    std::vector<std::string> history;
    std::optional<ExecutionResult> last_result;
    std::optional<std::string> last_sql;
    std::string last_question;
    /// Metric -> formula supplied in answer to a formula clarification.
    std::map<std::string, std::string> knowledge;
    /// Parameter values the user confirmed.
    std::map<std::string, std::string> resolved_parameters;
};

class Pipeline {
public:
    Pipeline(std::shared_ptr<const Catalog> catalog, std::shared_ptr<MemoryStore> store,
             std::shared_ptr<LlmGateway> llm, std::shared_ptr<ConnectionRegistry> connections,
             std::map<std::string, DomainSettings> domains = {}, PipelineOptions options = {},
             std::shared_ptr<const Clock> clock = steady_clock());

    /// Never throws for stage failures: they become a Refusal naming the
    /// stage. Throws UnknownDomain before any stage runs.
    TurnOutcome run(const std::string& user_id, const std::string& domain_id, SessionContext& session,
                    const std::string& question);

    const PipelineOptions& options() const { return options_; }
    const Catalog& catalog() const { return *catalog_; }
    MemoryStore& store() { return *store_; }
    LlmGateway& llm() { return *llm_; }
    const DomainSettings& domain_settings(const std::string& domain_id) const;

private:
    std::shared_ptr<Connection> connection_for(const std::string& domain_id) const;

    std::shared_ptr<const Catalog> catalog_;
    std::shared_ptr<MemoryStore> store_;
    std::shared_ptr<LlmGateway> llm_;
    std::shared_ptr<ConnectionRegistry> connections_;
    std::map<std::string, DomainSettings> domains_;
    PipelineOptions options_;
    std::shared_ptr<const Clock> clock_;
};

}  // namespace askdata
