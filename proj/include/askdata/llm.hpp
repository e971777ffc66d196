#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "askdata/error.hpp"

namespace askdata {

using Bindings = std::map<std::string, std::string>;

struct PromptTemplate {
    std::string id;
    std::string body;
    std::set<std::string> required_bindings;
    /// The body is our own wording rather than a published prompt.
    bool reconstructed = false;
};

/// `{name}` placeholders of a Python-format body; `{{`/`}}` are literal braces.
std::set<std::string> placeholders(std::string_view body);

/// Throws Error(MissingBinding) naming every absent placeholder.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

namespace prompts {
inline constexpr std::string_view kSchemaLinking = "schema_linking";
inline constexpr std::string_view kSqlGeneration = "sql_generation";
inline constexpr std::string_view kSqlReflection = "sql_reflection";
inline constexpr std::string_view kIntentDecision = "intent_decision";
inline constexpr std::string_view kTextAnalysis = "text_analysis";
inline constexpr std::string_view kSql2Nl = "sql2nl";
inline constexpr std::string_view kAxisChecker = "axis_checker";
inline constexpr std::string_view kChartGeneration = "chart_generation";
inline constexpr std::string_view kHaJudge = "ha_judge";
inline constexpr std::string_view kDifficultyRater = "difficulty_rater";
inline constexpr std::string_view kSlotExtraction = "slot_extraction";
inline constexpr std::string_view kSemanticAugment = "semantic_augment";
inline constexpr std::string_view kDomainToNlSql = "domain_to_nlsql";
}  // namespace prompts

class PromptRegistry {
public:
    /// Every pipeline prompt.
    static const PromptRegistry& builtin();

    void add(PromptTemplate tmpl);
    /// Throws Error(NotFound).
    const PromptTemplate& get(std::string_view id) const;
    std::vector<std::string> ids() const;
    std::string render(std::string_view id, const Bindings& bindings) const;

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

/// Text of the first ```kind fence, trimmed. Throws Error(NoFence).
std::string extract_fenced(std::string_view text, std::string_view kind);

/// ceil(chars / 4).
std::size_t estimate_tokens(std::string_view text);

struct CompletionRequest {
    std::string template_id;
    Bindings bindings;
    std::string prompt;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    /// 0 for the first try, 1 for the format-reminder retry.
    int attempt = 0;
};

struct CompletionResponse {
    std::string text;
    nlohmann::json provider_metadata = nlohmann::json::object();
};

class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    /// Throws Error(ProviderUnavailable) or Error(Timeout).
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

/// Returned by the mock for requests no rule covers.
inline constexpr std::string_view kUnscripted = "UNSCRIPTED";

/// Stable digest of a binding map, the exact-match key of mock rules.
std::string bindings_digest(const Bindings& bindings);

/// Scripted provider. A rule matches on template id plus, optionally, the
/// exact bindings digest, substrings that named bindings must contain, and
/// the attempt number. The first matching rule in insertion order answers.
class MockProvider final : public LlmProvider {
public:
    struct Rule {
        std::string template_id;
        std::optional<std::string> digest;
        std::vector<std::pair<std::string, std::string>> contains;
        std::optional<int> attempt;
        std::string response;
    };

    void add_rule(Rule rule);
    /// Shorthand: respond whenever `binding` contains `needle`.
    void when(std::string_view template_id, std::string binding, std::string needle, std::string response);
    /// Shorthand: respond to every request for the template.
    void always(std::string_view template_id, std::string response);

    /// Loads `<template_id>.json` files holding arrays of
    /// {"match": {binding: substring}, "digest", "attempt", "response"}.
    void load_dir(const std::string& dir);
    void load_rules(std::string_view template_id, const nlohmann::json& rules);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::size_t rule_count() const;

private:
    mutable std::mutex mutex_;
    std::vector<Rule> rules_;
};

/// Chat-completions style HTTP endpoint configured from ASKDATA_LLM_BASE_URL,
/// ASKDATA_LLM_API_KEY and ASKDATA_LLM_MODEL.
class HttpChatProvider final : public LlmProvider {
public:
    HttpChatProvider(std::string base_url, std::string api_key, std::string model, int timeout_seconds = 60);
    /// Throws Error(NotConfigured) when ASKDATA_LLM_BASE_URL is unset.
    static std::shared_ptr<HttpChatProvider> from_environment();
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    std::string base_url_;
    std::string api_key_;
    std::string model_;
    int timeout_seconds_;
};

/// Renders prompts, calls the provider and parses answers.
///
/// Provider failures (unavailable / timeout) get one retry. Output the
/// parser rejects gets one retry with a format reminder appended to the
/// prompt (attempt = 1); a second rejection raises LlmMalformedOutput.
class LlmGateway {
public:
    explicit LlmGateway(std::shared_ptr<LlmProvider> provider,
                        const PromptRegistry& registry = PromptRegistry::builtin());

    const PromptRegistry& registry() const { return registry_; }

    /// Raw completion text for one attempt.
    std::string complete(std::string_view template_id, const Bindings& bindings, int attempt = 0);

    /// `parse` signals unusable output by throwing Error(LlmMalformedOutput)
    /// or Error(NoFence), or a JSON exception.
    template <typename Parse>
    auto ask(std::string_view template_id, const Bindings& bindings, Parse&& parse)
        -> decltype(parse(std::string{})) {
        std::string last_problem;
        for (int attempt = 0; attempt < 2; ++attempt) {
            std::string text = complete(template_id, bindings, attempt);
            if (text == kUnscripted) {
                last_problem = "provider had no answer";
                continue;
            }
            try {
                return parse(text);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::LlmMalformedOutput && e.kind() != ErrorKind::NoFence) throw;
                last_problem = e.what();
            } catch (const nlohmann::json::exception& e) {
                last_problem = e.what();
            }
        }
        throw Error(ErrorKind::LlmMalformedOutput, std::string(template_id) + ": " + last_problem);
    }

    /// Template ids of every provider call, in order.
    std::vector<std::string> calls() const;
    void reset_calls();

private:
    std::shared_ptr<LlmProvider> provider_;
    const PromptRegistry& registry_;
    mutable std::mutex calls_mutex_;
    std::vector<std::string> calls_;
};

inline constexpr std::string_view kFormatReminder =
    "\nYour previous answer could not be parsed. Reply again and follow the required output format exactly.";

}  // namespace askdata
