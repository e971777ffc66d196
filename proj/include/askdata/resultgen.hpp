#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "askdata/engine.hpp"
#include "askdata/llm.hpp"
#include "askdata/planner.hpp"

namespace askdata {

/// Rows as a list of column -> value objects, the shape the answer
/// sections of the text-analysis and chart prompts expect.
std::string format_result(const ExecutionResult& result);

/// Throws LlmMalformedOutput when the model returns nothing usable.
std::string text_analysis(LlmGateway& llm, const std::string& question, const ExecutionResult& result);

struct ChartSpec {
    ChartType chart_type = ChartType::Bar;
    /// eCharts option object with keys among xAxis, yAxis, series.
    nlohmann::json option = nlohmann::json::object();

    nlohmann::json to_json() const;
};

/// Throws ChartInvalid: unknown keys, missing series, or series data whose
/// length differs from the category axis (pie: name/value pairs).
void validate_chart(const ChartSpec& chart);

/// Option JSON written by the model from the full result. One retry on an
/// invalid answer, then ChartInvalid.
ChartSpec chart_full(LlmGateway& llm, const std::string& question, ChartType chart_type,
                     const ExecutionResult& result);

struct AxisChoice {
    std::string x;
    std::string y;
    ChartType type = ChartType::Bar;
};

/// Throws AxisInvalid when the answer names columns outside `columns` or an
/// unknown chart type.
AxisChoice axis_check(LlmGateway& llm, const std::vector<std::string>& columns, const std::string& column_desc);

/// Template fill without the model. Line/bar: categories from the x column,
/// one series from the y column. Pie: one {name, value} pair per row.
/// Cells keep their JSON type, so string numbers stay strings.
ChartSpec chart_normalized(const ExecutionResult& result, const AxisChoice& axis);

/// With a hint and a two-column result the normalized path is used with the
/// first column on x; with a hint otherwise, the full path. Without a hint
/// the axis checker picks columns and type (full bar chart for a single
/// column).
ChartSpec make_chart(LlmGateway& llm, const std::string& question, std::optional<ChartType> hint,
                     const ExecutionResult& result, const std::string& column_desc);

/// The first lexicon metric named in the question that no linked field and
/// no recalled example question covers, unless a formula for it is known.
std::optional<std::string> knowledge_gap(const std::string& question, const SchemaLink& link,
                                         const std::vector<RecallHit>& examples,
                                         const std::vector<std::string>& metric_lexicon,
                                         const std::vector<std::string>& known_metrics);

struct ForecastRequest {
    /// (timestamp, value), timestamps strictly increasing and evenly spaced.
    std::vector<std::pair<double, double>> series;
    std::size_t horizon = 1;
    /// Seasonal period in samples; 0 or 1 for trend only.
    std::size_t period = 0;
};

struct ForecastComponents {
    double intercept = 0.0;
    double slope = 0.0;
    /// Additive seasonal offsets, summing to zero; empty without a period.
    std::vector<double> seasonal;
};

struct ForecastResult {
    std::vector<std::pair<double, double>> points;
    std::optional<ForecastComponents> components;

    nlohmann::json to_json() const;
};

class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual ForecastResult forecast(const ForecastRequest& request) = 0;
};

/// Linear trend plus additive seasonal means, fitted jointly by least
/// squares: the slope comes from the within-season regression and each
/// season's level is its mean of y - slope * t. Needs 2 * period points, or
/// 8 without a period; throws SeriesTooShort otherwise.
class NaiveForecaster final : public Forecaster {
public:
    ForecastResult forecast(const ForecastRequest& request) override;
};

/// POST {series, horizon, period} to an external service, expecting
/// {points: [[t, v], ...]}.
class HttpForecaster final : public Forecaster {
public:
    explicit HttpForecaster(std::string url, std::chrono::seconds timeout = std::chrono::seconds(30));
    ForecastResult forecast(const ForecastRequest& request) override;

private:
    std::string url_;
    std::chrono::seconds timeout_;
};

/// Throws InvalidArgument when the series is unusable for forecasting.
void check_forecast_request(const ForecastRequest& request);
/// Throws InvalidArgument when a result breaks the horizon/ordering contract.
void check_forecast_result(const ForecastRequest& request, const ForecastResult& result);

}  // namespace askdata
