#include <gtest/gtest.h>

#include <cctype>
#include <random>

#include "askdata/error.hpp"
#include "askdata/resultgen.hpp"

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

struct Rig {
    std::shared_ptr<MockProvider> mock = std::make_shared<MockProvider>();
    LlmGateway llm{mock};
};

ExecutionResult process_type_result() {
    ExecutionResult r;
    r.columns = {"process_type", "num"};
    const char* data[][2] = {{"2", "1145"}, {"5", "406"}, {"1", "505"}, {"4", "596"},
                             {"0", "84"},   {"7", "33"},  {"6", "19"}};
    for (const auto& d : data) r.rows.push_back({d[0], d[1]});
    r.row_count = r.rows.size();
    return r;
}

ExecutionResult monthly_sales() {
    ExecutionResult r;
    r.columns = {"month", "sales_amount"};
    for (int m = 7; m <= 12; ++m) r.rows.push_back({m, 1570 + 10 * (m - 7)});
    r.row_count = r.rows.size();
    return r;
}

const char* kProcessTypeOption = R"(```json
{
    "xAxis": {"type": "category", "name": "Application form type", "data": ["2", "5", "1", "4", "0", "7", "6"]},
    "yAxis": {"type": "value", "name": "Application Form quantit"},
    "series": [{"data": ["1145", "406", "505", "596", "84", "33", "19"], "name": "Application Form of X for May 23", "type": "bar"}]
}
```)";

TEST(FormatResult, MatchesTheChartPromptAnswerShape) {
    EXPECT_EQ(format_result(process_type_result()),
              "[{'process_type': '2', 'num': '1145'}, {'process_type': '5', 'num': '406'}, {'process_type': '1', "
              "'num': '505'}, {'process_type': '4', 'num': '596'}, {'process_type': '0', 'num': '84'}, "
              "{'process_type': '7', 'num': '33'}, {'process_type': '6', 'num': '19'}]");
    ExecutionResult r;
    r.columns = {"a", "b"};
    r.rows = {{nullptr, 1.5}, {"it's", 2}};
    EXPECT_EQ(format_result(r), "[{'a': None, 'b': 1.5}, {'a': 'it\\'s', 'b': 2}]");
    EXPECT_EQ(format_result(ExecutionResult{}), "[]");
}

TEST(TextAnalysis, EmptyResultNarrativeHasNoInventedNumbers) {
    Rig r;
    const std::string scripted = "No matching data was found for this question.";
    r.mock->when(prompts::kTextAnalysis, "result", "[]", scripted);
    ExecutionResult empty;
    empty.columns = {"month", "sales_amount"};
    auto text = text_analysis(r.llm, "Zhou Hui's sales in 2030", empty);
    EXPECT_EQ(text, scripted);
    for (char c : text) EXPECT_FALSE(std::isdigit(static_cast<unsigned char>(c)));
}

TEST(TextAnalysis, ScriptedNarrativeIsReturnedVerbatim) {
    Rig r;
    const std::string scripted =
        "From July to December 2022 Zhou Hui's monthly sales rose steadily from 1570 to 1620.";
    r.mock->when(prompts::kTextAnalysis, "result", "'month': 12", "  " + scripted + "\n");
    EXPECT_EQ(text_analysis(r.llm, "Zhou Hui's sales in the second half of 2022", monthly_sales()), scripted);
    r.mock->always(prompts::kTextAnalysis, "   ");
    EXPECT_EQ(kind_of([&] { text_analysis(r.llm, "q", process_type_result()); }), ErrorKind::LlmMalformedOutput);
}

TEST(ChartFull, ProcessTypeBarExample) {
    Rig r;
    r.mock->always(prompts::kChartGeneration, kProcessTypeOption);
    auto spec = chart_full(r.llm, "In May 23, what are the different types of application single numbers for X?",
                           ChartType::Bar, process_type_result());
    EXPECT_EQ(spec.chart_type, ChartType::Bar);
    EXPECT_EQ(spec.option["xAxis"]["data"], nlohmann::json({"2", "5", "1", "4", "0", "7", "6"}));
    EXPECT_EQ(spec.option["series"][0]["data"], nlohmann::json({"1145", "406", "505", "596", "84", "33", "19"}));
    EXPECT_NO_THROW(validate_chart(spec));
    auto prompt_answer = r.llm.calls();
    ASSERT_EQ(prompt_answer.size(), 1u);
}

TEST(ChartFull, LengthMismatchIsInvalidAfterRetry) {
    Rig r;
    r.mock->always(prompts::kChartGeneration,
                   R"(```json
{"xAxis": {"type": "category", "data": ["a", "b"]}, "series": [{"data": [1], "type": "bar"}]}
```)");
    EXPECT_EQ(kind_of([&] { chart_full(r.llm, "q", ChartType::Bar, process_type_result()); }), ErrorKind::ChartInvalid);
    EXPECT_EQ(r.llm.calls().size(), 2u);
}

TEST(ChartFull, SingleBarAndExtraKeysDropped) {
    Rig r;
    r.mock->always(prompts::kChartGeneration,
                   R"(```json
{"title": {"text": "t"}, "xAxis": {"data": ["total"]}, "yAxis": {}, "series": [{"data": [42]}]}
```)");
    ExecutionResult one;
    one.columns = {"total"};
    one.rows = {{42}};
    auto spec = chart_full(r.llm, "q", ChartType::Bar, one);
    EXPECT_FALSE(spec.option.contains("title"));
    EXPECT_EQ(spec.option["series"][0]["type"], "bar");
    EXPECT_EQ(spec.option["series"][0]["data"].size(), 1u);
}

TEST(ValidateChart, Rules) {
    ChartSpec s;
    s.chart_type = ChartType::Line;
    s.option = {{"xAxis", {{"data", {1, 2}}}}, {"series", {{{"data", {3, 4}}, {"type", "line"}}}}};
    EXPECT_NO_THROW(validate_chart(s));
    auto bad = s;
    bad.option["legend"] = nlohmann::json::object();
    EXPECT_EQ(kind_of([&] { validate_chart(bad); }), ErrorKind::ChartInvalid);
    bad = s;
    bad.option["series"][0]["type"] = "bar";
    EXPECT_EQ(kind_of([&] { validate_chart(bad); }), ErrorKind::ChartInvalid);
    bad = s;
    bad.option.erase("series");
    EXPECT_EQ(kind_of([&] { validate_chart(bad); }), ErrorKind::ChartInvalid);
    bad = s;
    bad.option.erase("xAxis");
    EXPECT_EQ(kind_of([&] { validate_chart(bad); }), ErrorKind::ChartInvalid);
    ChartSpec pie;
    pie.chart_type = ChartType::Pie;
    pie.option = {{"series", {{{"data", {{{"name", "a"}, {"value", 1}}}}}}}};
    EXPECT_NO_THROW(validate_chart(pie));
    pie.option["series"][0]["data"] = {1, 2};
    EXPECT_EQ(kind_of([&] { validate_chart(pie); }), ErrorKind::ChartInvalid);
}

TEST(AxisCheck, RankingPicksBar) {
    Rig r;
    r.mock->when(prompts::kAxisChecker, "column_name", "total_profit",
                 "```json\n{\"xAxis\": \"product_name\", \"yAxis\": \"total_profit\", \"type\": \"bar\"}\n```");
    auto a = axis_check(r.llm, {"product_name", "total_profit"}, "top products ranked by total profit");
    EXPECT_EQ(a.x, "product_name");
    EXPECT_EQ(a.y, "total_profit");
    EXPECT_EQ(a.type, ChartType::Bar);
}

TEST(AxisCheck, TrendPicksLine) {
    Rig r;
    r.mock->when(prompts::kAxisChecker, "column_desc", "trend",
                 "```json\n{\"xAxis\": \"month\", \"yAxis\": \"sales_amount\", \"type\": \"line\"}\n```");
    EXPECT_EQ(axis_check(r.llm, {"month", "sales_amount"}, "monthly sales trend").type, ChartType::Line);
}

TEST(AxisCheck, UnknownColumnOrType) {
    Rig r;
    r.mock->when(prompts::kAxisChecker, "column_desc", "ghost",
                 "```json\n{\"xAxis\": \"Month\", \"yAxis\": \"sales_amount\", \"type\": \"line\"}\n```");
    r.mock->when(prompts::kAxisChecker, "column_desc", "radar",
                 "```json\n{\"xAxis\": \"month\", \"yAxis\": \"sales_amount\", \"type\": \"radar\"}\n```");
    EXPECT_EQ(kind_of([&] { axis_check(r.llm, {"month", "sales_amount"}, "ghost"); }), ErrorKind::AxisInvalid);
    EXPECT_EQ(kind_of([&] { axis_check(r.llm, {"month", "sales_amount"}, "radar"); }), ErrorKind::AxisInvalid);
    EXPECT_EQ(kind_of([&] { axis_check(r.llm, {"month"}, "x"); }), ErrorKind::InvalidArgument);
}

TEST(ChartNormalized, SixMonthsLine) {
    auto result = monthly_sales();
    auto spec = chart_normalized(result, {"month", "sales_amount", ChartType::Line});
    EXPECT_EQ(spec.chart_type, ChartType::Line);
    EXPECT_EQ(spec.option["xAxis"]["data"], nlohmann::json({7, 8, 9, 10, 11, 12}));
    EXPECT_EQ(spec.option["series"][0]["data"], nlohmann::json({1570, 1580, 1590, 1600, 1610, 1620}));
    EXPECT_EQ(spec.option["series"][0]["type"], "line");
    EXPECT_NO_THROW(validate_chart(spec));
    EXPECT_EQ(chart_normalized(result, {"month", "sales_amount", ChartType::Line}).to_json(), spec.to_json());
}

TEST(ChartNormalized, EmptyResultGivesEmptySeries) {
    ExecutionResult empty;
    empty.columns = {"month", "sales_amount"};
    auto spec = chart_normalized(empty, {"month", "sales_amount", ChartType::Bar});
    EXPECT_TRUE(spec.option["xAxis"]["data"].empty());
    EXPECT_TRUE(spec.option["series"][0]["data"].empty());
    EXPECT_NO_THROW(validate_chart(spec));
}

TEST(ChartNormalized, PieIsNameValuePairs) {
    ExecutionResult r;
    r.columns = {"status", "n"};
    r.rows = {{"paid", 2}, {"shipped", 2}, {"refunded", 1}};
    auto spec = chart_normalized(r, {"status", "n", ChartType::Pie});
    EXPECT_FALSE(spec.option.contains("xAxis"));
    EXPECT_EQ(spec.option["series"][0]["data"],
              nlohmann::json::parse(
                  R"([{"name":"paid","value":2},{"name":"shipped","value":2},{"name":"refunded","value":1}])"));
    EXPECT_NO_THROW(validate_chart(spec));
}

TEST(ChartNormalized, StringsStayStringsAndUnknownAxis) {
    auto spec = chart_normalized(process_type_result(), {"process_type", "num", ChartType::Bar});
    EXPECT_EQ(spec.option["series"][0]["data"][0], "1145");
    EXPECT_EQ(kind_of([&] { chart_normalized(process_type_result(), {"kind", "num", ChartType::Bar}); }),
              ErrorKind::AxisInvalid);
}

TEST(ChartNormalized, RandomResultsAlwaysValidate) {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        ExecutionResult r;
        r.columns = {"a", "b", "c"};
        std::size_t rows = rng() % 12;
        for (std::size_t i = 0; i < rows; ++i) {
            r.rows.push_back({Cell(int(rng() % 100)), Cell(std::to_string(rng() % 7)), Cell(nullptr)});
        }
        for (auto type : {ChartType::Line, ChartType::Bar, ChartType::Pie}) {
            AxisChoice axis{r.columns[rng() % 3], r.columns[rng() % 3], type};
            auto spec = chart_normalized(r, axis);
            EXPECT_NO_THROW(validate_chart(spec));
            EXPECT_EQ(chart_normalized(r, axis).to_json(), spec.to_json());
        }
    }
}

TEST(MakeChart, PathSelection) {
    Rig r;
    auto spec = make_chart(r.llm, "q", ChartType::Line, monthly_sales(), "");
    EXPECT_TRUE(r.llm.calls().empty());
    EXPECT_EQ(spec.option["xAxis"]["name"], "month");

    r.mock->always(prompts::kChartGeneration, kProcessTypeOption);
    ExecutionResult three = process_type_result();
    three.columns.push_back("extra");
    for (auto& row : three.rows) row.push_back(0);
    make_chart(r.llm, "q", ChartType::Bar, three, "");
    EXPECT_EQ(r.llm.calls(), std::vector<std::string>{"chart_generation"});

    r.llm.reset_calls();
    r.mock->always(prompts::kAxisChecker, "```json\n{\"xAxis\": \"month\", \"yAxis\": \"sales_amount\", \"type\": \"line\"}\n```");
    auto auto_spec = make_chart(r.llm, "q", std::nullopt, monthly_sales(), "trend");
    EXPECT_EQ(r.llm.calls(), std::vector<std::string>{"axis_checker"});
    EXPECT_EQ(auto_spec.chart_type, ChartType::Line);
}

TEST(KnowledgeGap, ClosureRate) {
    const std::vector<std::string> lexicon{"closure rate", "conversion rate"};
    SchemaLink link;
    link.entries.push_back({"issues", {"status", "department", "month"}});
    const std::string q = "What is the closure rate of online issues in the Search department in August?";
    EXPECT_EQ(knowledge_gap(q, link, {}, lexicon, {}), std::optional<std::string>("closure rate"));
    EXPECT_EQ(knowledge_gap("How many issues were opened in August?", link, {}, lexicon, {}), std::nullopt);
    EXPECT_EQ(knowledge_gap(q, link, {}, lexicon, {"Closure Rate"}), std::nullopt);

    SchemaLink with_field = link;
    with_field.entries[0].fields.push_back("closure_rate");
    EXPECT_EQ(knowledge_gap(q, with_field, {}, lexicon, {}), std::nullopt);

    RecallHit hit;
    hit.demonstration.query = "closure rate of the Search department";
    EXPECT_EQ(knowledge_gap(q, link, {hit}, lexicon, {}), std::nullopt);
}

TEST(NaiveForecaster, ConstantSeries) {
    NaiveForecaster f;
    ForecastRequest req;
    for (int i = 0; i < 10; ++i) req.series.emplace_back(i, 7.25);
    req.horizon = 5;
    auto out = f.forecast(req);
    ASSERT_EQ(out.points.size(), 5u);
    for (const auto& [t, v] : out.points) EXPECT_NEAR(v, 7.25, 1e-12);
    EXPECT_NEAR(out.components->slope, 0.0, 1e-12);
    req.period = 5;
    for (const auto& [t, v] : f.forecast(req).points) EXPECT_NEAR(v, 7.25, 1e-12);
}

TEST(NaiveForecaster, ExactLineContinues) {
    NaiveForecaster f;
    ForecastRequest req;
    const double a = -3.5, b = 0.75;
    for (int i = 0; i < 12; ++i) req.series.emplace_back(100 + 2 * i, a + b * (100 + 2 * i));
    req.horizon = 6;
    auto out = f.forecast(req);
    for (std::size_t h = 0; h < 6; ++h) {
        double t = 122 + 2.0 * double(h + 1);
        EXPECT_NEAR(out.points[h].first, t, 1e-9);
        EXPECT_NEAR(out.points[h].second, a + b * t, 1e-9);
    }
}

TEST(NaiveForecaster, SawtoothRepeats) {
    NaiveForecaster f;
    ForecastRequest req;
    const double tooth[4] = {0, 1, 2, 3};
    for (int i = 0; i < 12; ++i) req.series.emplace_back(i, tooth[i % 4]);
    req.horizon = 4;
    req.period = 4;
    auto out = f.forecast(req);
    // hand oracle: no within-season variation, so slope 0 and each season's mean is its tooth value
    for (int h = 0; h < 4; ++h) EXPECT_NEAR(out.points[h].second, tooth[(12 + h) % 4], 1e-9);
    ASSERT_EQ(out.components->seasonal.size(), 4u);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(out.components->seasonal[j], tooth[j] - 1.5, 1e-9);
}

TEST(NaiveForecaster, TrendPlusSeasonRecovered) {
    NaiveForecaster f;
    ForecastRequest req;
    const double s[3] = {1.0, -2.5, 1.5};
    for (int i = 0; i < 9; ++i) req.series.emplace_back(i, 2.0 + 0.5 * i + s[i % 3]);
    req.horizon = 7;
    req.period = 3;
    auto out = f.forecast(req);
    EXPECT_NEAR(out.components->slope, 0.5, 1e-9);
    EXPECT_NEAR(out.components->intercept, 2.0, 1e-9);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(out.components->seasonal[j], s[j], 1e-9);
    for (int h = 0; h < 7; ++h) {
        int i = 9 + h;
        EXPECT_NEAR(out.points[h].second, 2.0 + 0.5 * i + s[i % 3], 1e-9);
    }
}

TEST(NaiveForecaster, HorizonAndOrderingProperty) {
    NaiveForecaster f;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> val(-100, 100);
    for (int trial = 0; trial < 200; ++trial) {
        ForecastRequest req;
        req.period = rng() % 6;
        std::size_t need = req.period > 1 ? 2 * req.period : 8;
        std::size_t n = need + rng() % 20;
        double t0 = val(rng), step = 0.5 + (rng() % 10);
        for (std::size_t i = 0; i < n; ++i) req.series.emplace_back(t0 + step * double(i), val(rng));
        req.horizon = 1 + rng() % 24;
        auto out = f.forecast(req);
        EXPECT_NO_THROW(check_forecast_result(req, out));
    }
}

TEST(NaiveForecaster, Errors) {
    NaiveForecaster f;
    ForecastRequest req;
    for (int i = 0; i < 7; ++i) req.series.emplace_back(i, i);
    EXPECT_EQ(kind_of([&] { f.forecast(req); }), ErrorKind::SeriesTooShort);
    req.period = 4;
    EXPECT_EQ(kind_of([&] { f.forecast(req); }), ErrorKind::SeriesTooShort);
    req.period = 3;
    EXPECT_NO_THROW(f.forecast(req));
    req.horizon = 0;
    EXPECT_EQ(kind_of([&] { f.forecast(req); }), ErrorKind::InvalidArgument);
    req.horizon = 1;
    req.series[3].first = req.series[2].first;
    EXPECT_EQ(kind_of([&] { f.forecast(req); }), ErrorKind::InvalidArgument);
}

}  // namespace
}  // namespace askdata
