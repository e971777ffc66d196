#include <gtest/gtest.h>

#include <random>

#include "askdata/error.hpp"
#include "askdata/sql/lineage.hpp"
#include "askdata/synthesizer.hpp"
#include "fixtures.hpp"
#include "scenario.hpp"

namespace askdata {
namespace {

using testing::fenced;
using testing::fixture_catalog;

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an askdata::Error";
    return ErrorKind::Internal;
}

struct Rig {
    Catalog catalog = fixture_catalog();
    std::shared_ptr<MockProvider> mock = std::make_shared<MockProvider>();
    LlmGateway llm{mock};
};

RecallHit hit(const std::string& id, const std::string& query, const std::string& sql, double score,
              Channel channel = Channel::Similarity) {
    RecallHit h;
    h.demonstration.id = id;
    h.demonstration.query = query;
    h.demonstration.sql = sql;
    h.score = score;
    h.channel = channel;
    return h;
}

TEST(SqlExamples, NumberedQuerySqlBlocks) {
    EXPECT_EQ(format_sql_examples({hit("a", "q one", " SELECT 1 ", 1), hit("b", "q two", "SELECT 2", 1)}),
              "--Query1: q one\n--SQL1: \nSELECT 1\n--Query2: q two\n--SQL2: \nSELECT 2\n");
    EXPECT_EQ(format_sql_examples({}), "");
}

TEST(GenerateSql, SecondHalfSalesWithTwoExamples) {
    Rig r;
    GenerationContext ctx;
    ctx.question = "Zhou Hui's monthly sales in the second half of 2022";
    ctx.schema_info = describe_schema(testing::employee_schema());
    ctx.examples = {hit("e1", "Zhou Hui's sales in 2021 by month",
                        "SELECT name,month, sales_amount FROM employee WHERE name = \"Zhou Hui\" AND employee.year = "
                        "2021 ORDER BY month ASC;",
                        0.8),
                    hit("e2", "total sales per employee", "SELECT name, SUM(sales_amount) FROM employee GROUP BY name",
                        0.5)};
    r.mock->when(prompts::kSqlGeneration, "examples", "--Query2: total sales per employee",
                 fenced("sql", testing::kZhouHuiSql));
    std::string sql = generate_sql(r.llm, ctx);
    EXPECT_EQ(sql, trim(testing::kZhouHuiSql));
    auto parsed = sql::parse(sql, Dialect::Embedded);
    ASSERT_TRUE(parsed.ok());
    auto lineage = sql::extract_lineage(sql, Dialect::Embedded, &r.catalog);
    EXPECT_EQ(lineage.tables, (NameSet{"employee"}));
    EXPECT_TRUE(icontains(sql, "month BETWEEN 7 AND 12"));
    EXPECT_TRUE(icontains(sql, "year = 2022"));
    EXPECT_TRUE(icontains(sql, "name = \"Zhou Hui\""));
    EXPECT_TRUE(sql::validate(sql, Dialect::Embedded, r.catalog).empty());
}

TEST(GenerateSql, UnscriptedIsMalformed) {
    Rig r;
    GenerationContext ctx;
    ctx.question = "q";
    EXPECT_EQ(kind_of([&] { generate_sql(r.llm, ctx); }), ErrorKind::LlmMalformedOutput);
    r.mock->always(prompts::kSqlGeneration, "```sql\n\n```");
    EXPECT_EQ(kind_of([&] { generate_sql(r.llm, ctx); }), ErrorKind::LlmMalformedOutput);
}

TEST(GenerateSql, KnowledgeReachesThePrompt) {
    Rig r;
    GenerationContext ctx;
    ctx.question = "closure rate in August";
    ctx.knowledge = {{"closure rate", "closed issues / all issues"}};
    r.mock->when(prompts::kSqlGeneration, "schema_info", "- closure rate: closed issues / all issues",
                 fenced("sql", "SELECT 1"));
    EXPECT_EQ(generate_sql(r.llm, ctx), "SELECT 1");
}

std::vector<RecallHit> equal_length_examples() {
    // same text length so every example costs the same number of tokens
    return {hit("a", "question number 1", "SELECT month FROM employee WHERE year = 2021", 0.9),
            hit("b", "question number 2", "SELECT month FROM employee WHERE year = 2022", 0.8),
            hit("c", "question number 3", "SELECT month FROM employee WHERE year = 2023", 0.7),
            hit("d", "question number 4", "SELECT month FROM employee WHERE year = 2024", 0.6),
            hit("k", "question number 5", "SELECT month FROM employee WHERE year = 2025", 0.5, Channel::SlotKernel)};
}

std::size_t tokens_with(const GenerationContext& base, std::vector<RecallHit> examples) {
    GenerationContext c = base;
    c.examples = std::move(examples);
    c.token_budget = 1u << 30;
    return fit_generation_budget(c, PromptRegistry::builtin()).estimated_tokens;
}

TEST(Budget, DropsToTheTwoBestWithKernel) {
    GenerationContext ctx;
    ctx.question = "which month";
    ctx.schema_info = describe_schema(testing::employee_schema());
    ctx.examples = equal_length_examples();
    ctx.kernel_id = "k";
    auto all = ctx.examples;
    std::size_t two = tokens_with(ctx, {all[0], all[4]});
    ASSERT_GT(tokens_with(ctx, {all[0], all[1], all[4]}), two);
    ctx.token_budget = two;
    auto p = fit_generation_budget(ctx, PromptRegistry::builtin());
    ASSERT_EQ(p.kept.size(), 2u);
    EXPECT_EQ(p.kept[0].demonstration.id, "a");
    EXPECT_EQ(p.kept[1].demonstration.id, "k");
    EXPECT_LE(p.estimated_tokens, ctx.token_budget);
    EXPECT_NE(p.bindings["examples"].find("--Query2: question number 5"), std::string::npos);
}

TEST(Budget, KernelSurvivesAnyBudgetAdmittingOneExample) {
    std::mt19937 rng(5);
    GenerationContext ctx;
    ctx.question = "which month";
    auto base = equal_length_examples();
    std::size_t none = tokens_with(ctx, {});
    std::size_t full = tokens_with(ctx, base);
    for (int trial = 0; trial < 100; ++trial) {
        auto ex = base;
        for (auto& e : ex) e.score = std::uniform_real_distribution<double>(0, 1)(rng);
        std::shuffle(ex.begin(), ex.end(), rng);
        ctx.examples = ex;
        ctx.kernel_id = "k";
        for (std::size_t budget = none; budget <= full; ++budget) {
            ctx.token_budget = budget;
            auto p = fit_generation_budget(ctx, PromptRegistry::builtin());
            EXPECT_LE(p.estimated_tokens, budget);
            if (p.kept.empty()) continue;
            EXPECT_TRUE(std::any_of(p.kept.begin(), p.kept.end(),
                                    [](const RecallHit& h) { return h.demonstration.id == "k"; }));
            // survivors other than the kernel outscore every dropped non-kernel example
            double min_kept = 2;
            for (const auto& h : p.kept) if (h.demonstration.id != "k") min_kept = std::min(min_kept, h.score);
            for (const auto& h : ex) {
                bool kept = std::any_of(p.kept.begin(), p.kept.end(),
                                        [&](const RecallHit& x) { return x.demonstration.id == h.demonstration.id; });
                if (!kept && h.demonstration.id != "k") EXPECT_LE(h.score, min_kept);
            }
        }
    }
}

TEST(Budget, Unsatisfiable) {
    GenerationContext ctx;
    ctx.question = "which month";
    ctx.examples = equal_length_examples();
    ctx.token_budget = 10;
    EXPECT_EQ(kind_of([&] { fit_generation_budget(ctx, PromptRegistry::builtin()); }),
              ErrorKind::BudgetUnsatisfiable);
}

TEST(Reflect, GhostTableRepairedInOneRound) {
    Rig r;
    const std::string broken = "SELECT name, sales_amount FROM ghost_table WHERE year = 2022";
    auto diags = sql::validate(broken, Dialect::Embedded, r.catalog);
    ASSERT_FALSE(diags.empty());
    r.mock->when(prompts::kSqlReflection, "sql", "ghost_table",
                 fenced("sql", "SELECT name, sales_amount FROM employee WHERE year = 2022"));
    auto out = reflect(r.llm, "sales in 2022", broken, diags, "employee(...)", Dialect::Embedded, r.catalog);
    EXPECT_EQ(out.rounds, 1);
    EXPECT_TRUE(sql::validate(out.sql, Dialect::Embedded, r.catalog).empty());
    ASSERT_EQ(out.history.size(), 1u);
}

TEST(Reflect, DiagnosticsReachThePrompt) {
    Rig r;
    const std::string broken = "SELECT bogus FROM employee";
    auto diags = sql::validate(broken, Dialect::Embedded, r.catalog);
    r.mock->when(prompts::kSqlReflection, "diagnostics", "bogus", fenced("sql", "SELECT name FROM employee"));
    EXPECT_EQ(reflect(r.llm, "q", broken, diags, "", Dialect::Embedded, r.catalog).sql, "SELECT name FROM employee");
}

TEST(Reflect, EmptyDiagnosticsIsInternalError) {
    Rig r;
    EXPECT_EQ(kind_of([&] { reflect(r.llm, "q", "SELECT name FROM employee", {}, "", Dialect::Embedded, r.catalog); }),
              ErrorKind::Internal);
    EXPECT_TRUE(r.llm.calls().empty());
}

TEST(Reflect, SameBrokenSqlFailsAfterMaxRounds) {
    Rig r;
    const std::string broken = "SELECT name FROM ghost_table";
    auto diags = sql::validate(broken, Dialect::Embedded, r.catalog);
    r.mock->always(prompts::kSqlReflection, fenced("sql", broken));
    try {
        reflect(r.llm, "q", broken, diags, "", Dialect::Embedded, r.catalog, 2);
        FAIL() << "expected ReflectionFailed";
    } catch (const ReflectionFailedError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ReflectionFailed);
        ASSERT_EQ(e.diagnostics().size(), 1u);
        EXPECT_EQ(e.diagnostics()[0].subject, diags[0].subject);
    }
    EXPECT_EQ(r.llm.calls().size(), 2u);
}

TEST(Reflect, SecondRoundUsesNewDiagnostics) {
    Rig r;
    r.mock->when(prompts::kSqlReflection, "sql", "ghost_table", fenced("sql", "SELECT bogus FROM employee"));
    r.mock->when(prompts::kSqlReflection, "diagnostics", "bogus", fenced("sql", "SELECT name FROM employee"));
    const std::string broken = "SELECT name FROM ghost_table";
    auto out = reflect(r.llm, "q", broken, sql::validate(broken, Dialect::Embedded, r.catalog), "",
                       Dialect::Embedded, r.catalog);
    EXPECT_EQ(out.rounds, 2);
    EXPECT_EQ(out.sql, "SELECT name FROM employee");
}

TEST(Authorize, Verdicts) {
    Catalog c = fixture_catalog();
    const std::string sql = "SELECT name, sales_amount FROM employee";
    EXPECT_TRUE(authorize("analyst", sql, Dialect::Embedded, c).allowed);
    auto denied = authorize("intern", sql, Dialect::Embedded, c);
    EXPECT_FALSE(denied.allowed);
    ASSERT_EQ(denied.missing.size(), 1u);
    EXPECT_EQ(denied.missing[0], (ColumnRef{"employee", "sales_amount"}));
    EXPECT_NE(denied.reason.find("inadequate authorization"), std::string::npos);
    EXPECT_NE(denied.reason.find("employee.sales_amount"), std::string::npos);
    EXPECT_TRUE(authorize("intern", "SELECT name, month FROM employee WHERE year = 2022", Dialect::Embedded, c).allowed);
}

TEST(Authorize, UnresolvedColumnsFailClosed) {
    Catalog c = fixture_catalog();
    auto v = authorize("analyst", "SELECT name FROM employee, Highschooler", Dialect::Embedded, c);
    EXPECT_FALSE(v.allowed);
    EXPECT_NE(v.reason.find("unresolved"), std::string::npos);
}

TEST(Authorize, CountStarNeedsSomeGrant) {
    Catalog c = fixture_catalog();
    EXPECT_TRUE(authorize("intern", "SELECT COUNT(*) FROM employee", Dialect::Embedded, c).allowed);
    auto v = authorize("guest", "SELECT COUNT(*) FROM employee", Dialect::Embedded, c);
    EXPECT_FALSE(v.allowed);
    EXPECT_NE(v.reason.find("employee.*"), std::string::npos);
    EXPECT_EQ(kind_of([&] { authorize("analyst", "SELEC", Dialect::Embedded, c); }), ErrorKind::NotParsed);
}

TEST(Execute, SelectOne) {
    auto conn = testing::fixture_connection();
    auto r = execute_sql(*conn, "SELECT 1");
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_EQ(r.rows[0][0], 1);
    EXPECT_EQ(r.columns.size(), 1u);
}

TEST(Execute, GoldGradeCountOnToyTable) {
    auto conn = testing::fixture_connection();
    auto r = execute_sql(*conn, testing::kGradeCountGold);
    // fixture: grades 9..12 hold 2, 3, 1 and 4 students
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_EQ(r.rows[0][0], 12);
}

TEST(Execute, EngineErrorsAndTruncation) {
    auto conn = testing::fixture_connection();
    EXPECT_EQ(kind_of([&] { execute_sql(*conn, "SELECT nope FROM employee"); }), ErrorKind::ExecutionError);
    auto r = execute_sql(*conn, "SELECT * FROM employee", 5);
    EXPECT_EQ(r.rows.size(), 5u);
    EXPECT_TRUE(r.truncated);
}

}  // namespace
}  // namespace askdata
