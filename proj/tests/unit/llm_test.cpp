#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <variant>

#include "askdata/error.hpp"
#include "askdata/llm.hpp"

namespace askdata {
namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an askdata::Error";
    return ErrorKind::Internal;
}

Bindings example_bindings(const PromptTemplate& t) {
    Bindings b;
    for (const auto& name : t.required_bindings) b[name] = "<" + name + " value>";
    return b;
}

TEST(Registry, EveryTemplateRendersFully) {
    const auto& reg = PromptRegistry::builtin();
    for (const char* id : {"schema_linking", "sql_generation", "sql_reflection", "intent_decision", "text_analysis",
                           "sql2nl", "axis_checker", "chart_generation", "ha_judge", "difficulty_rater",
                           "slot_extraction"}) {
        const auto& t = reg.get(id);
        std::string text = reg.render(id, example_bindings(t));
        for (const auto& name : t.required_bindings) {
            EXPECT_EQ(text.find("{" + name + "}"), std::string::npos) << id << " " << name;
            EXPECT_NE(text.find("<" + name + " value>"), std::string::npos) << id << " " << name;
        }
    }
    EXPECT_EQ(kind_of([&] { reg.get("nope"); }), ErrorKind::NotFound);
}

TEST(Registry, SchemaLinkingTail) {
    std::string p = PromptRegistry::builtin().render(
        prompts::kSchemaLinking, {{"schema_info", "employee(name)"}, {"examples", "none"}, {"query", "who?"}});
    EXPECT_NE(p.find("Return relevant fields:"), std::string::npos);
    EXPECT_NE(p.find("employee(name)"), std::string::npos);
}

TEST(Registry, AxisCheckerChartTypes) {
    std::string p = PromptRegistry::builtin().render(prompts::kAxisChecker,
                                                     {{"column_name", "month"}, {"column_desc", "calendar month"}});
    EXPECT_NE(p.find("Chart types: line, bar, pie"), std::string::npos);
}

TEST(Registry, ReconstructedTemplatesAreMarked) {
    const auto& reg = PromptRegistry::builtin();
    EXPECT_FALSE(reg.get(prompts::kSchemaLinking).reconstructed);
    EXPECT_FALSE(reg.get(prompts::kSql2Nl).reconstructed);
    EXPECT_TRUE(reg.get(prompts::kSqlReflection).reconstructed);
    EXPECT_TRUE(reg.get(prompts::kIntentDecision).reconstructed);
}

TEST(Render, MissingBindingNamesAllGaps) {
    try {
        PromptRegistry::builtin().render(prompts::kSchemaLinking, {{"schema_info", "x"}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingBinding);
        EXPECT_NE(std::string(e.what()).find("query"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("examples"), std::string::npos);
    }
}

TEST(Render, BracesEscape) {
    PromptTemplate t{"t", "{{literal}} {name}", {"name"}, false};
    EXPECT_EQ(render(t, {{"name", "v"}}), "{literal} v");
    EXPECT_EQ(placeholders("{a} {{b}} {c}"), (std::set<std::string>{"a", "c"}));
}

TEST(Render, Deterministic) {
    Bindings b{{"query", "q"}, {"result", "r"}};
    EXPECT_EQ(PromptRegistry::builtin().render(prompts::kTextAnalysis, b),
              PromptRegistry::builtin().render(prompts::kTextAnalysis, b));
}

TEST(ExtractFenced, Examples) {
    EXPECT_EQ(extract_fenced("```sql\nSELECT 1\n```", "sql"), "SELECT 1");
    EXPECT_EQ(extract_fenced("prose ```json\n[]\n``` more prose", "json"), "[]");
    EXPECT_EQ(kind_of([] { extract_fenced("no fences", "sql"); }), ErrorKind::NoFence);
    EXPECT_EQ(extract_fenced("```SQL\n SELECT 2 \n```", "sql"), "SELECT 2");
    EXPECT_EQ(extract_fenced("```json\n{}\n```\n```sql\nSELECT 3\n```", "sql"), "SELECT 3");
    EXPECT_EQ(kind_of([] { extract_fenced("```sqlite\nSELECT 1\n```", "sql"); }), ErrorKind::NoFence);
}

TEST(EstimateTokens, CeilingOfQuarterAndMonotone) {
    EXPECT_EQ(estimate_tokens(""), 0u);
    EXPECT_EQ(estimate_tokens("abc"), 1u);
    EXPECT_EQ(estimate_tokens("abcd"), 1u);
    EXPECT_EQ(estimate_tokens("abcde"), 2u);
    std::string s;
    std::size_t prev = 0;
    for (int i = 0; i < 200; ++i) {
        s += static_cast<char>('a' + i % 26);
        EXPECT_GE(estimate_tokens(s), prev);
        prev = estimate_tokens(s);
    }
}

TEST(Mock, ScriptedByDigestAndSubstring) {
    MockProvider m;
    Bindings b{{"query", "q1"}, {"result", "r"}};
    m.add_rule({std::string(prompts::kTextAnalysis), bindings_digest(b), {}, std::nullopt, "by digest"});
    m.when(prompts::kTextAnalysis, "query", "q2", "by substring");
    CompletionRequest r;
    r.template_id = prompts::kTextAnalysis;
    r.bindings = b;
    EXPECT_EQ(m.complete(r).text, "by digest");
    EXPECT_EQ(m.complete(r).text, "by digest");
    r.bindings["query"] = "about q2";
    EXPECT_EQ(m.complete(r).text, "by substring");
    r.bindings["query"] = "q3";
    EXPECT_EQ(m.complete(r).text, kUnscripted);
    r.template_id = prompts::kSql2Nl;
    EXPECT_EQ(m.complete(r).text, kUnscripted);
}

TEST(Mock, NoCallOrderDependence) {
    MockProvider m;
    m.when("t", "x", "a", "A");
    m.when("t", "x", "b", "B");
    CompletionRequest ra{"t", {{"x", "a"}}, "", 0, 1, 0};
    CompletionRequest rb{"t", {{"x", "b"}}, "", 0, 1, 0};
    std::string a1 = m.complete(ra).text, b1 = m.complete(rb).text;
    std::string b2 = m.complete(rb).text, a2 = m.complete(ra).text;
    EXPECT_EQ(a1, a2);
    EXPECT_EQ(b1, b2);
}

TEST(Mock, LoadsScriptDirectory) {
    auto dir = std::filesystem::temp_directory_path() / "askdata_mock_dir";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "text_analysis.json")
        << R"([{"match": {"query": "sales"}, "response": "sales went up"},
               {"attempt": 1, "response": "second try"}])";
    MockProvider m;
    m.load_dir(dir.string());
    std::filesystem::remove_all(dir);
    EXPECT_EQ(m.rule_count(), 2u);
    CompletionRequest r{std::string(prompts::kTextAnalysis), {{"query", "sales?"}, {"result", ""}}, "", 0, 1, 0};
    EXPECT_EQ(m.complete(r).text, "sales went up");
    r.bindings["query"] = "other";
    EXPECT_EQ(m.complete(r).text, kUnscripted);
    r.attempt = 1;
    EXPECT_EQ(m.complete(r).text, "second try");
}

class FlakyProvider : public LlmProvider {
public:
    explicit FlakyProvider(std::vector<std::variant<std::string, ErrorKind>> script) : script_(std::move(script)) {}
    CompletionResponse complete(const CompletionRequest& request) override {
        prompts_.push_back(request.prompt);
        auto step = script_.at(std::min(calls_++, script_.size() - 1));
        if (auto* k = std::get_if<ErrorKind>(&step)) throw Error(*k, "scripted failure");
        return {std::get<std::string>(step), {}};
    }
    std::size_t calls_ = 0;
    std::vector<std::string> prompts_;

private:
    std::vector<std::variant<std::string, ErrorKind>> script_;
};

const Bindings kTa{{"query", "q"}, {"result", "r"}};

TEST(Gateway, RetriesTransientProviderFailureOnce) {
    auto p = std::make_shared<FlakyProvider>(std::vector<std::variant<std::string, ErrorKind>>{
        ErrorKind::ProviderUnavailable, std::string("ok")});
    LlmGateway g(p);
    EXPECT_EQ(g.complete(prompts::kTextAnalysis, kTa), "ok");
    EXPECT_EQ(p->calls_, 2u);

    auto down = std::make_shared<FlakyProvider>(
        std::vector<std::variant<std::string, ErrorKind>>{ErrorKind::Timeout, ErrorKind::Timeout});
    LlmGateway g2(down);
    EXPECT_EQ(kind_of([&] { g2.complete(prompts::kTextAnalysis, kTa); }), ErrorKind::Timeout);
    EXPECT_EQ(down->calls_, 2u);
}

TEST(Gateway, MalformedOutputGetsOneReminderRetry) {
    auto p = std::make_shared<FlakyProvider>(
        std::vector<std::variant<std::string, ErrorKind>>{std::string("no fence"), std::string("```sql\nSELECT 1\n```")});
    LlmGateway g(p);
    auto sql = g.ask(prompts::kTextAnalysis, kTa, [](const std::string& t) { return extract_fenced(t, "sql"); });
    EXPECT_EQ(sql, "SELECT 1");
    ASSERT_EQ(p->prompts_.size(), 2u);
    EXPECT_GT(p->prompts_[1].size(), p->prompts_[0].size());
    EXPECT_EQ(p->prompts_[1].substr(0, p->prompts_[0].size()), p->prompts_[0]);

    auto bad = std::make_shared<FlakyProvider>(std::vector<std::variant<std::string, ErrorKind>>{std::string("x")});
    LlmGateway g2(bad);
    EXPECT_EQ(kind_of([&] {
                  g2.ask(prompts::kTextAnalysis, kTa, [](const std::string& t) { return extract_fenced(t, "sql"); });
              }),
              ErrorKind::LlmMalformedOutput);
    EXPECT_EQ(bad->calls_, 2u);
}

TEST(Gateway, UnscriptedSurfacesAsMalformed) {
    auto m = std::make_shared<MockProvider>();
    LlmGateway g(m);
    EXPECT_EQ(kind_of([&] { g.ask(prompts::kTextAnalysis, kTa, [](const std::string& t) { return t; }); }),
              ErrorKind::LlmMalformedOutput);
    EXPECT_EQ(g.calls(), (std::vector<std::string>{"text_analysis", "text_analysis"}));
    g.reset_calls();
    EXPECT_TRUE(g.calls().empty());
}

TEST(Gateway, MissingBindingIsNotRetried) {
    auto m = std::make_shared<MockProvider>();
    m->always(prompts::kTextAnalysis, "x");
    LlmGateway g(m);
    EXPECT_EQ(kind_of([&] { g.complete(prompts::kTextAnalysis, {{"query", "q"}}); }), ErrorKind::MissingBinding);
    EXPECT_TRUE(g.calls().empty());
}

TEST(Gateway, MockIsDeterministic) {
    auto m = std::make_shared<MockProvider>();
    m->always(prompts::kTextAnalysis, "analysis");
    LlmGateway g(m);
    EXPECT_EQ(g.complete(prompts::kTextAnalysis, kTa), g.complete(prompts::kTextAnalysis, kTa));
}

TEST(HttpProvider, FromEnvironmentRequiresBaseUrl) {
    unsetenv("ASKDATA_LLM_BASE_URL");
    EXPECT_EQ(kind_of([] { HttpChatProvider::from_environment(); }), ErrorKind::NotConfigured);
}

}  // namespace
}  // namespace askdata
