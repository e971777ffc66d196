#include "askdata/llm.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>

#include "askdata/common.hpp"

namespace askdata {

namespace {

constexpr std::string_view kSchemaLinkingBody = R"P(According to the following [schema info] and [question], return the fields related to [question] in [schema info] in ```json``` format. The ```json``` format of the returned content is as follows. It is an array, and each item must contain TABLE and FIELD. Please replace the values of variables between $$ in the following example with reasonable content:
```json
[{{"TABLE": $table_1$, "FIELD": [$field_1$, $field_2$]}}, {{"TABLE": $table_2$, "FIELD": [$field_1$, $field_2$] }}, ...]```
[schema info]:{schema_info}
{examples}
[question]: {query}
Return relevant fields:)P";

constexpr std::string_view kSqlTemplateBody = R"P(Based on the following {dialect} table and examples, generate the corresponding SQL statement for the question. Return only one SQL statement after the question, and the format must be ```sql```.)P";

constexpr std::string_view kTextAnalysisBody = R"P(
Question: {query}
Database Query Result: {result}
Based on the provided question and the results from the database query, please describe the results line by line using appropriate language. The description should cover the full results and provide a concise conclusion, focusing solely on the core issue. There is no need to display any charts, but if the results are related to time, please infer the relevant time range retrospectively. If the query results are empty, return a suitable description without making any assumptions.  
)P";

constexpr std::string_view kSql2NlBody = R"P(You are now required to generate user questions based on table information and SQL statements: {table_info}
Generate 3 instances of user questions based on table information and SQL statements:
[SQL Statements]: {sql}
[Generated Questions]:)P";

constexpr std::string_view kAxisCheckerBody = R"P(Based on the problem and chart description analysis, select the horizontal and vertical coordinates from {column_name}
Keep the original information in column_name
Chart types: line, bar, pie
Based on the table description analysis, select only any one type from the chart types.
Only returns a ```json``` format code
The structure only contains
{{
    "xAxis": "",
    "yAxis": "",
    "type": ""
}}
Table description: {column_desc})P";

constexpr std::string_view kChartGenerationBody = R"P(
Example: 
Question: In May 23, what are the different types of application single numbers for X?
Chart_type: bar
Answer: [{{'process_type': '2', 'num': '1145'}}, {{'process_type': '5', 'num': '406'}}, {{'process_type': '1', 'num': '505'}}, {{'process_type': '4', 'num': '596'}}, {{'process_type': '0', 'num': '84'}}, {{'process_type': '7', 'num': '33'}}, {{'process_type': '6', 'num': '19'}}]
Output:
The answer has seven sets of data, the chart type is "bar", and a JSON needs to be output.
```json
{{
    "xAxis": {{
        "type": "category",
        "name": "Application form type",
        "data": ["2", "5", "1", "4", "0", "7", "6"]
      }},
      "yAxis": {{
        "type": "value",
        "name": "Application Form quantit"
      }},
      "series": [
        {{
            "data": ["1145", "406", "505", "596", "84", "33", "19"],
            "name": "Application Form of X for May 23",
            "type": "bar"
        }}
      ]
}}
```
Question: {query}
Chart_type: {chart_type}
Answer: {sql_result}
I want you to act like an eCharts builder, an expert in creating meaningful charts.
Completely refer to the above [Example], analyze the data in the answer, and return an ECharts configuration option to present the data results
Output:)P";

constexpr std::string_view kSqlGenerationSections = R"P(
[table]:
{schema_info}
[examples]:
{examples}
[question]: {query}
[SQL]:)P";

constexpr std::string_view kSqlReflectionBody = R"P(The following {dialect} SQL statement failed validation. Repair it so that it answers the question.
Error types checked: syntax errors, references to tables that do not exist, references to columns that do not exist.
[question]: {query}
[SQL]:
{sql}
[table schemas]:
{schema_info}
[diagnostics]:
{diagnostics}
Return only the corrected SQL statement, and the format must be ```sql```.)P";

constexpr std::string_view kIntentDecisionBody = R"P(You are the intent analyst of a data analysis assistant for the thematic domain "{domain}".
[conversation history]:
{history}
[reference questions]:
{examples}
[clarification parameters]:
{parameters}
[current question]: {question}
1. Rewrite the current question into a complete, self-contained question, filling in what it omits from the conversation history.
2. Decide whether the question can be answered with the data of this domain ("relevant").
3. Decide whether the user only asks to visualize the previous result ("direct_plot").
4. If a chart is wanted, choose one chart type from: line, bar, pie ("chart_type"), otherwise null.
5. For each clarification parameter the question mentions, report the value it uses ("parameters").
Only returns a ```json``` format code
{{"completed_question": "", "relevant": true, "direct_plot": false, "chart_type": null, "parameters": {{}}}})P";

constexpr std::string_view kSlotExtractionBody = R"P(Isolate the key business terms of the question and write a shortened query that keeps only those terms.
[question]: {question}
Only returns a ```json``` format code
{{"key_terms": [], "shortened_query": ""}})P";

constexpr std::string_view kHaJudgeBody = R"P(Question: {question}
Reference answer: {reference_answer}
Candidate answer: {candidate_answer}
Taking the question and the reference answer into account, is the candidate answer correct? Reply with exactly one word: Yes or No.)P";

constexpr std::string_view kDifficultyRaterBody = R"P(Rate how hard it is to answer the question with the SQL on four dimensions, each scored from 1 (low) to 3 (high): comprehension of the question, requirement for external knowledge, complexity of the data, complexity of the SQL.
[question]: {question}
[SQL]: {sql}
Only returns a ```json``` format code
{{"question_comprehension": 1, "external_knowledge": 1, "data_complexity": 1, "sql_complexity": 1}})P";

constexpr std::string_view kSemanticAugmentBody = R"P(Rewrite the question so that its meaning stays exactly the same while the wording and sentence structure change.
[question]: {query}
[Rewritten question]:)P";

constexpr std::string_view kDomainToNlSqlBody = R"P(You are now required to generate user questions and the {dialect} SQL statements answering them based on table information: {table_info}
Generate {count} pairs of a user question and its SQL statement.
Only returns a ```json``` format code
[{{"query": "", "sql": ""}}])P";

PromptTemplate make(std::string_view id, std::string body, bool reconstructed) {
    PromptTemplate t;
    t.id = std::string(id);
    t.required_bindings = placeholders(body);
    t.body = std::move(body);
    t.reconstructed = reconstructed;
    return t;
}

}  // namespace

std::set<std::string> placeholders(std::string_view body) {
    std::set<std::string> names;
    for (size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '{') {
            if (i + 1 < body.size() && body[i + 1] == '{') {
                ++i;
                continue;
            }
            size_t close = body.find('}', i + 1);
            if (close == std::string_view::npos) break;
            std::string_view name = body.substr(i + 1, close - i - 1);
            bool ident = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
                return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
            });
            if (ident) names.emplace(name);
            i = close;
        } else if (body[i] == '}' && i + 1 < body.size() && body[i + 1] == '}') {
            ++i;
        }
    }
    return names;
}

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
    std::vector<std::string> missing;
    for (const auto& name : tmpl.required_bindings) {
        if (!bindings.count(name)) missing.push_back(name);
    }
    if (!missing.empty()) {
        throw Error(ErrorKind::MissingBinding, tmpl.id + ": " + join(missing, ", "));
    }
    const std::string& body = tmpl.body;
    std::string out;
    out.reserve(body.size());
    for (size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
            out.push_back('{');
            ++i;
        } else if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
            out.push_back('}');
            ++i;
        } else if (c == '{') {
            size_t close = body.find('}', i + 1);
            auto it = close == std::string::npos ? bindings.end() : bindings.find(body.substr(i + 1, close - i - 1));
            if (it == bindings.end()) {
                out.push_back(c);
            } else {
                out += it->second;
                i = close;
            }
        } else {
            out.push_back(c);
        }
    }
    return out;
}

const PromptRegistry& PromptRegistry::builtin() {
    static const PromptRegistry registry = [] {
        PromptRegistry r;
        r.add(make(prompts::kSchemaLinking, std::string(kSchemaLinkingBody), false));
        r.add(make(prompts::kSqlGeneration, std::string(kSqlTemplateBody) + std::string(kSqlGenerationSections), false));
        r.add(make(prompts::kTextAnalysis, std::string(kTextAnalysisBody), false));
        r.add(make(prompts::kSql2Nl, std::string(kSql2NlBody), false));
        r.add(make(prompts::kAxisChecker, std::string(kAxisCheckerBody), false));
        r.add(make(prompts::kChartGeneration, std::string(kChartGenerationBody), false));
        r.add(make(prompts::kSqlReflection, std::string(kSqlReflectionBody), true));
        r.add(make(prompts::kIntentDecision, std::string(kIntentDecisionBody), true));
        r.add(make(prompts::kSlotExtraction, std::string(kSlotExtractionBody), true));
        r.add(make(prompts::kHaJudge, std::string(kHaJudgeBody), true));
        r.add(make(prompts::kDifficultyRater, std::string(kDifficultyRaterBody), true));
        r.add(make(prompts::kSemanticAugment, std::string(kSemanticAugmentBody), true));
        r.add(make(prompts::kDomainToNlSql, std::string(kDomainToNlSqlBody), true));
        return r;
    }();
    return registry;
}

void PromptRegistry::add(PromptTemplate tmpl) {
    std::string id = tmpl.id;
    templates_[id] = std::move(tmpl);
}

const PromptTemplate& PromptRegistry::get(std::string_view id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw Error(ErrorKind::NotFound, "prompt template '" + std::string(id) + "'");
    return it->second;
}

std::vector<std::string> PromptRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

std::string PromptRegistry::render(std::string_view id, const Bindings& bindings) const {
    return askdata::render(get(id), bindings);
}

std::string extract_fenced(std::string_view text, std::string_view kind) {
    const std::string open = "```" + to_lower(kind);
    std::string lower = to_lower(text);
    size_t pos = 0;
    while ((pos = lower.find(open, pos)) != std::string::npos) {
        size_t after = pos + open.size();
        // "```json" must not match "```jsonl" and the like.
        if (after < lower.size() && (std::isalnum(static_cast<unsigned char>(lower[after])) || lower[after] == '_')) {
            pos = after;
            continue;
        }
        size_t close = text.find("```", after);
        if (close == std::string_view::npos) break;
        return trim(text.substr(after, close - after));
    }
    throw Error(ErrorKind::NoFence, "no ```" + std::string(kind) + " fence in output");
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::string bindings_digest(const Bindings& bindings) {
    nlohmann::json j = bindings;
    return hex_digest(j.dump());
}

void MockProvider::add_rule(Rule rule) {
    std::lock_guard lock(mutex_);
    rules_.push_back(std::move(rule));
}

void MockProvider::when(std::string_view template_id, std::string binding, std::string needle, std::string response) {
    Rule r;
    r.template_id = std::string(template_id);
    r.contains.emplace_back(std::move(binding), std::move(needle));
    r.response = std::move(response);
    add_rule(std::move(r));
}

void MockProvider::always(std::string_view template_id, std::string response) {
    Rule r;
    r.template_id = std::string(template_id);
    r.response = std::move(response);
    add_rule(std::move(r));
}

void MockProvider::load_rules(std::string_view template_id, const nlohmann::json& rules) {
    if (!rules.is_array()) throw Error(ErrorKind::InvalidArgument, "mock script must be an array");
    for (const auto& entry : rules) {
        Rule r;
        r.template_id = std::string(template_id);
        if (entry.contains("digest")) r.digest = entry.at("digest").get<std::string>();
        if (entry.contains("attempt")) r.attempt = entry.at("attempt").get<int>();
        const nlohmann::json match = entry.value("match", nlohmann::json::object());
        for (const auto& [binding, needle] : match.items()) {
            r.contains.emplace_back(binding, needle.get<std::string>());
        }
        r.response = entry.at("response").get<std::string>();
        add_rule(std::move(r));
    }
}

void MockProvider::load_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "mock script directory '" + dir + "' not found");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        try {
            load_rules(file.stem().string(), nlohmann::json::parse(read_file(file.string())));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Io, file.string() + ": " + e.what());
        }
    }
}

CompletionResponse MockProvider::complete(const CompletionRequest& request) {
    std::lock_guard lock(mutex_);
    std::optional<std::string> digest;
    for (const auto& rule : rules_) {
        if (rule.template_id != request.template_id) continue;
        if (rule.attempt && *rule.attempt != request.attempt) continue;
        if (rule.digest) {
            if (!digest) digest = bindings_digest(request.bindings);
            if (*rule.digest != *digest) continue;
        }
        bool ok = std::all_of(rule.contains.begin(), rule.contains.end(), [&](const auto& c) {
            auto it = request.bindings.find(c.first);
            return it != request.bindings.end() && it->second.find(c.second) != std::string::npos;
        });
        if (!ok) continue;
        return CompletionResponse{rule.response, {{"provider", "mock"}}};
    }
    return CompletionResponse{std::string(kUnscripted), {{"provider", "mock"}}};
}

std::size_t MockProvider::rule_count() const {
    std::lock_guard lock(mutex_);
    return rules_.size();
}

LlmGateway::LlmGateway(std::shared_ptr<LlmProvider> provider, const PromptRegistry& registry)
    : provider_(std::move(provider)), registry_(registry) {
    if (!provider_) throw Error(ErrorKind::InvalidArgument, "gateway needs a provider");
}

std::string LlmGateway::complete(std::string_view template_id, const Bindings& bindings, int attempt) {
    CompletionRequest request;
    request.template_id = std::string(template_id);
    request.bindings = bindings;
    request.prompt = registry_.render(template_id, bindings);
    if (attempt > 0) request.prompt += kFormatReminder;
    request.attempt = attempt;
    {
        std::lock_guard lock(calls_mutex_);
        calls_.push_back(request.template_id);
    }
    try {
        return provider_->complete(request).text;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::ProviderUnavailable && e.kind() != ErrorKind::Timeout) throw;
        return provider_->complete(request).text;
    }
}

std::vector<std::string> LlmGateway::calls() const {
    std::lock_guard lock(calls_mutex_);
    return calls_;
}

void LlmGateway::reset_calls() {
    std::lock_guard lock(calls_mutex_);
    calls_.clear();
}

}  // namespace askdata
