#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "askdata/catalog.hpp"
#include "askdata/llm.hpp"
#include "askdata/memory.hpp"

namespace askdata {

struct IntentDecision {
    std::string completed_question;
    bool relevant = true;
    bool direct_plot = false;
    std::optional<ChartType> chart_hint;
    /// Clarification parameters the question binds, name -> inferred value.
    std::map<std::string, std::string> parameters;

    nlohmann::json to_json() const;
};

/// Parses the fenced JSON answer of the intent prompt. Throws
/// LlmMalformedOutput when keys are missing or inconsistent.
IntentDecision parse_intent(std::string_view text);

/// `history` holds earlier completed questions, oldest first.
IntentDecision decide_intent(LlmGateway& llm, const std::string& domain_id, const std::vector<std::string>& history,
                             const std::string& question, const std::vector<RecallHit>& nearby,
                             const std::vector<std::string>& parameter_names = {});

/// How a table is turned into text for the similarity channel.
enum class SchemaTextStrategy {
    /// Table name, field names and field descriptions.
    Direct,
    /// Table name and table description only.
    Summary,
    /// Table name and field names.
    KeyWords,
    /// Field names with their enum codes and value descriptions.
    KeyWordValues,
};

std::string_view to_string(SchemaTextStrategy strategy);
/// Throws InvalidArgument.
SchemaTextStrategy parse_schema_text_strategy(std::string_view text);
std::string schema_text(const TableSchema& schema, SchemaTextStrategy strategy);

struct TableCandidate {
    std::string table;
    double score = 0.0;
    Channel channel = Channel::Similarity;
};

struct MultiRecallOptions {
    SchemaTextStrategy strategy = SchemaTextStrategy::Direct;
    std::size_t similarity_top_n = 5;
    bool use_similarity = true;
    bool use_homologous = true;
};

/// Domain tables ranked by inner product between the question and their
/// schema text.
std::vector<TableCandidate> similarity_channel(const std::string& question, const std::vector<TableSchema>& schemas,
                                               const Embedder& embedder, SchemaTextStrategy strategy,
                                               std::size_t top_n);

/// Tables of the homologous demonstration, restricted to `domain_tables`.
std::vector<TableCandidate> homologous_channel(const std::string& question, const std::string& domain_id,
                                               const MemoryStore& store, const NameSet& domain_tables);

/// Homologous tables first, then similarity tables, deduplicated.
std::vector<TableCandidate> multi_recall(const std::string& question, const std::string& domain_id,
                                         const Catalog& catalog, const MemoryStore& store,
                                         const MultiRecallOptions& options = {});

struct SchemaLinkEntry {
    std::string table;
    std::vector<std::string> fields;
};

struct SchemaLink {
    std::vector<SchemaLinkEntry> entries;
    /// Dropped tables and fields.
    std::vector<std::string> warnings;

    NameSet tables() const;
    /// Nullptr when `table` is not linked.
    const SchemaLinkEntry* find(std::string_view table) const;
    nlohmann::json to_json() const;
};

/// Reads the TABLE/FIELD array, keeping only candidate tables and their
/// known fields (spelled as in the schema). Throws LlmMalformedOutput when
/// the array or an entry's keys are missing.
SchemaLink parse_schema_link(std::string_view text, const std::vector<TableSchema>& candidates);

/// Past questions with the TABLE/FIELD answer their SQL implies.
std::string format_link_examples(const std::vector<RecallHit>& examples);

SchemaLink schema_link(LlmGateway& llm, const std::string& question, const std::vector<TableSchema>& candidates,
                       const std::vector<RecallHit>& examples);

/// Candidate schemas as prompt text; enum values only for linked fields.
std::string linked_schema_info(const std::vector<TableSchema>& candidates, const SchemaLink& link);

struct SlotFeatures {
    std::vector<std::string> key_terms;
    std::string shortened_query;
};

SlotFeatures extract_slots(LlmGateway& llm, const std::string& question);

struct RecallBundle {
    std::vector<RecallHit> examples;
    bool kernel_included = false;
    std::optional<std::string> kernel_id;
    std::set<Channel> channels_used;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

/// Full-length top-k merged with the kernel example (best hit for the
/// shortened query). The kernel replaces the lowest-scoring hit when it is
/// not already present. Without `llm`, or when slot extraction fails, this
/// is plain top-k.
RecallBundle hybrid_recall(LlmGateway* llm, const MemoryStore& store, const std::string& question,
                           const std::string& domain_id, std::size_t k);

}  // namespace askdata
