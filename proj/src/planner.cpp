#include "askdata/planner.hpp"

#include <algorithm>

#include "askdata/error.hpp"

namespace askdata {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorKind::LlmMalformedOutput, what); }

std::string format_history(const std::vector<std::string>& history) {
    if (history.empty()) return "(none)";
    std::string out;
    for (std::size_t i = 0; i < history.size(); ++i) out += std::to_string(i + 1) + ". " + history[i] + "\n";
    return out;
}

std::string format_nearby(const std::vector<RecallHit>& hits) {
    if (hits.empty()) return "(none)";
    std::string out;
    for (const auto& h : hits) out += "- " + h.demonstration.query + "\n";
    return out;
}

}  // namespace

nlohmann::json IntentDecision::to_json() const {
    nlohmann::json j{{"completed_question", completed_question},
                     {"relevant", relevant},
                     {"direct_plot", direct_plot},
                     {"chart_type", nullptr},
                     {"parameters", parameters}};
    if (chart_hint) j["chart_type"] = to_string(*chart_hint);
    return j;
}

IntentDecision parse_intent(std::string_view text) {
    auto j = nlohmann::json::parse(extract_fenced(text, "json"));
    if (!j.is_object()) malformed("intent answer is not an object");
    for (const char* key : {"completed_question", "relevant", "direct_plot"}) {
        if (!j.contains(key)) malformed(std::string("intent answer lacks ") + key);
    }
    IntentDecision d;
    d.completed_question = trim(j.at("completed_question").get<std::string>());
    d.relevant = j.at("relevant").get<bool>();
    d.direct_plot = j.at("direct_plot").get<bool>();
    if (j.contains("chart_type") && !j["chart_type"].is_null()) {
        auto t = parse_chart_type(j["chart_type"].get<std::string>());
        if (!t) malformed("unknown chart type " + j["chart_type"].dump());
        d.chart_hint = *t;
    }
    if (j.contains("parameters") && j["parameters"].is_object()) {
        for (const auto& [name, value] : j["parameters"].items()) {
            if (value.is_null()) continue;
            d.parameters[name] = value.is_string() ? value.get<std::string>() : value.dump();
        }
    }
    if (d.relevant && !d.direct_plot && d.completed_question.empty()) malformed("empty completed question");
    return d;
}

IntentDecision decide_intent(LlmGateway& llm, const std::string& domain_id, const std::vector<std::string>& history,
                             const std::string& question, const std::vector<RecallHit>& nearby,
                             const std::vector<std::string>& parameter_names) {
    if (trim(question).empty()) throw Error(ErrorKind::InvalidArgument, "question is empty");
    Bindings b{{"domain", domain_id},
               {"history", format_history(history)},
               {"examples", format_nearby(nearby)},
               {"parameters", parameter_names.empty() ? "(none)" : join(parameter_names, ", ")},
               {"question", question}};
    IntentDecision d = llm.ask(prompts::kIntentDecision, b, [](const std::string& t) { return parse_intent(t); });
    if (d.completed_question.empty()) d.completed_question = question;
    return d;
}

std::string_view to_string(SchemaTextStrategy strategy) {
    switch (strategy) {
        case SchemaTextStrategy::Direct: return "direct";
        case SchemaTextStrategy::Summary: return "summary";
        case SchemaTextStrategy::KeyWords: return "key_words";
        case SchemaTextStrategy::KeyWordValues: return "key_word_values";
    }
    return "direct";
}

SchemaTextStrategy parse_schema_text_strategy(std::string_view text) {
    for (auto s : {SchemaTextStrategy::Direct, SchemaTextStrategy::Summary, SchemaTextStrategy::KeyWords,
                   SchemaTextStrategy::KeyWordValues}) {
        if (iequals(text, to_string(s))) return s;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown schema text strategy '" + std::string(text) + "'");
}

std::string schema_text(const TableSchema& schema, SchemaTextStrategy strategy) {
    std::string out = schema.table_name;
    switch (strategy) {
        case SchemaTextStrategy::Direct:
            for (const auto& f : schema.fields) out += " " + f.name + " " + f.description;
            break;
        case SchemaTextStrategy::Summary:
            out += " " + schema.description;
            break;
        case SchemaTextStrategy::KeyWords:
            for (const auto& f : schema.fields) out += " " + f.name;
            break;
        case SchemaTextStrategy::KeyWordValues:
            for (const auto& f : schema.fields) {
                out += " " + f.name;
                for (const auto& [code, meaning] : f.enum_values) out += " " + code + " " + meaning;
                for (const auto& [key, meaning] : f.nested_keys) out += " " + key + " " + meaning;
            }
            break;
    }
    return out;
}

std::vector<TableCandidate> similarity_channel(const std::string& question, const std::vector<TableSchema>& schemas,
                                               const Embedder& embedder, SchemaTextStrategy strategy,
                                               std::size_t top_n) {
    std::vector<TableCandidate> out;
    if (schemas.empty() || top_n == 0) return out;
    Embedding q = embedder.embed(question);
    for (const auto& s : schemas) {
        std::string text = schema_text(s, strategy);
        if (trim(text).empty()) continue;
        out.push_back({s.table_name, inner_product(q, embedder.embed(text)), Channel::Similarity});
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    if (out.size() > top_n) out.resize(top_n);
    return out;
}

std::vector<TableCandidate> homologous_channel(const std::string& question, const std::string& domain_id,
                                               const MemoryStore& store, const NameSet& domain_tables) {
    std::vector<TableCandidate> out;
    auto hits = store.search(question, 1, domain_id);
    if (hits.empty() || hits[0].score < store.homologous_threshold()) return out;
    for (const auto& t : hits[0].demonstration.tables) {
        auto it = domain_tables.find(t);
        if (it == domain_tables.end()) continue;
        out.push_back({*it, hits[0].score, Channel::Homologous});
    }
    return out;
}

std::vector<TableCandidate> multi_recall(const std::string& question, const std::string& domain_id,
                                         const Catalog& catalog, const MemoryStore& store,
                                         const MultiRecallOptions& options) {
    auto schemas = catalog.domain_schemas(domain_id);
    NameSet domain_tables;
    for (const auto& s : schemas) domain_tables.insert(s.table_name);
    std::vector<TableCandidate> merged;
    NameSet seen;
    if (options.use_homologous) {
        for (auto& c : homologous_channel(question, domain_id, store, domain_tables)) {
            if (seen.insert(c.table).second) merged.push_back(std::move(c));
        }
    }
    if (options.use_similarity) {
        for (auto& c : similarity_channel(question, schemas, store.embedder(), options.strategy,
                                          options.similarity_top_n)) {
            if (seen.insert(c.table).second) merged.push_back(std::move(c));
        }
    }
    return merged;
}

NameSet SchemaLink::tables() const {
    NameSet out;
    for (const auto& e : entries) out.insert(e.table);
    return out;
}

const SchemaLinkEntry* SchemaLink::find(std::string_view table) const {
    for (const auto& e : entries) {
        if (iequals(e.table, table)) return &e;
    }
    return nullptr;
}

nlohmann::json SchemaLink::to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& e : entries) arr.push_back({{"TABLE", e.table}, {"FIELD", e.fields}});
    return arr;
}

SchemaLink parse_schema_link(std::string_view text, const std::vector<TableSchema>& candidates) {
    auto j = nlohmann::json::parse(extract_fenced(text, "json"));
    if (!j.is_array()) malformed("schema link answer is not an array");
    SchemaLink link;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("TABLE") || !item.contains("FIELD")) {
            malformed("schema link entry lacks TABLE or FIELD");
        }
        if (!item["TABLE"].is_string() || !item["FIELD"].is_array()) malformed("schema link entry has wrong types");
        std::string table = item["TABLE"].get<std::string>();
        auto schema = std::find_if(candidates.begin(), candidates.end(),
                                   [&](const TableSchema& s) { return iequals(s.table_name, table); });
        if (schema == candidates.end()) {
            link.warnings.push_back("dropped non-candidate table " + table);
            continue;
        }
        SchemaLinkEntry* entry = nullptr;
        for (auto& e : link.entries) {
            if (iequals(e.table, schema->table_name)) entry = &e;
        }
        if (!entry) {
            link.entries.push_back({schema->table_name, {}});
            entry = &link.entries.back();
        }
        for (const auto& f : item["FIELD"]) {
            if (!f.is_string()) malformed("schema link field is not a string");
            std::string name = f.get<std::string>();
            const FieldSpec* spec = schema->find_field(name);
            if (!spec) {
                link.warnings.push_back("dropped unknown field " + schema->table_name + "." + name);
                continue;
            }
            if (std::none_of(entry->fields.begin(), entry->fields.end(),
                             [&](const std::string& x) { return iequals(x, spec->name); })) {
                entry->fields.push_back(spec->name);
            }
        }
    }
    return link;
}

std::string format_link_examples(const std::vector<RecallHit>& examples) {
    std::string out;
    for (const auto& h : examples) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& t : h.demonstration.tables) {
            std::vector<std::string> fields;
            for (const auto& f : h.demonstration.fields) {
                if (iequals(f.table, t)) fields.push_back(f.column);
            }
            arr.push_back({{"TABLE", t}, {"FIELD", fields}});
        }
        out += "[question]: " + h.demonstration.query + "\nReturn relevant fields:\n```json\n" + arr.dump() +
               "\n```\n";
    }
    return out;
}

SchemaLink schema_link(LlmGateway& llm, const std::string& question, const std::vector<TableSchema>& candidates,
                       const std::vector<RecallHit>& examples) {
    if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "no candidate tables");
    Bindings b{{"schema_info", describe_schemas(candidates)},
               {"examples", format_link_examples(examples)},
               {"query", question}};
    return llm.ask(prompts::kSchemaLinking, b,
                   [&](const std::string& t) { return parse_schema_link(t, candidates); });
}

std::string linked_schema_info(const std::vector<TableSchema>& candidates, const SchemaLink& link) {
    if (link.entries.empty()) return describe_schemas(candidates);
    std::string out;
    for (const auto& e : link.entries) {
        for (const auto& s : candidates) {
            if (!iequals(s.table_name, e.table)) continue;
            NameSet linked(e.fields.begin(), e.fields.end());
            out += describe_schema(s, &linked);
        }
    }
    return out;
}

SlotFeatures extract_slots(LlmGateway& llm, const std::string& question) {
    return llm.ask(prompts::kSlotExtraction, {{"question", question}}, [](const std::string& t) {
        auto j = nlohmann::json::parse(extract_fenced(t, "json"));
        if (!j.is_object() || !j.contains("shortened_query")) malformed("slot answer lacks shortened_query");
        SlotFeatures s;
        s.shortened_query = trim(j.at("shortened_query").get<std::string>());
        if (s.shortened_query.empty()) malformed("empty shortened query");
        if (j.contains("key_terms")) s.key_terms = j["key_terms"].get<std::vector<std::string>>();
        return s;
    });
}

nlohmann::json RecallBundle::to_json() const {
    nlohmann::json ex = nlohmann::json::array();
    for (const auto& h : examples) {
        ex.push_back({{"id", h.demonstration.id},
                      {"query", h.demonstration.query},
                      {"score", h.score},
                      {"channel", to_string(h.channel)}});
    }
    nlohmann::json ch = nlohmann::json::array();
    for (auto c : channels_used) ch.push_back(to_string(c));
    nlohmann::json j{{"examples", ex}, {"kernel_included", kernel_included}, {"channels", ch}};
    if (kernel_id) j["kernel_id"] = *kernel_id;
    if (!warnings.empty()) j["warnings"] = warnings;
    return j;
}

RecallBundle hybrid_recall(LlmGateway* llm, const MemoryStore& store, const std::string& question,
                           const std::string& domain_id, std::size_t k) {
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
    RecallBundle bundle;
    bundle.examples = store.search(question, k, domain_id);
    if (!bundle.examples.empty()) bundle.channels_used.insert(Channel::Similarity);
    if (!llm) return bundle;

    SlotFeatures slots;
    try {
        slots = extract_slots(*llm, question);
    } catch (const Error& e) {
        bundle.warnings.push_back(std::string("slot extraction failed: ") + e.what());
        return bundle;
    }
    auto kernel = store.search(slots.shortened_query, 1, domain_id);
    if (kernel.empty()) return bundle;
    bundle.kernel_id = kernel[0].demonstration.id;
    bundle.kernel_included = true;
    for (const auto& h : bundle.examples) {
        if (h.demonstration.id == *bundle.kernel_id) return bundle;
    }
    if (bundle.examples.size() >= k) bundle.examples.pop_back();
    kernel[0].channel = Channel::SlotKernel;
    bundle.examples.push_back(std::move(kernel[0]));
    bundle.channels_used.insert(Channel::SlotKernel);
    return bundle;
}

}  // namespace askdata
