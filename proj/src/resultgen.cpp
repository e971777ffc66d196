#include "askdata/resultgen.hpp"

#include <algorithm>
#include <cmath>

#include "askdata/error.hpp"

namespace askdata {

namespace {

[[noreturn]] void invalid_chart(const std::string& what) { throw Error(ErrorKind::ChartInvalid, what); }

std::string python_repr(const Cell& c) {
    if (c.is_null()) return "None";
    if (c.is_string()) {
        std::string out = "'";
        for (char ch : c.get<std::string>()) {
            if (ch == '\'' || ch == '\\') out += '\\';
            out += ch;
        }
        return out + "'";
    }
    return c.dump();
}

std::size_t column_index(const ExecutionResult& result, const std::string& name) {
    for (std::size_t i = 0; i < result.columns.size(); ++i) {
        if (result.columns[i] == name) return i;
    }
    throw Error(ErrorKind::AxisInvalid, "no column named '" + name + "'");
}

std::string metric_key(std::string_view text) {
    std::string s = to_lower(text);
    std::replace(s.begin(), s.end(), '_', ' ');
    return normalize_whitespace(s);
}

}  // namespace

std::string format_result(const ExecutionResult& result) {
    std::string out = "[";
    for (std::size_t r = 0; r < result.rows.size(); ++r) {
        if (r) out += ", ";
        out += "{";
        for (std::size_t c = 0; c < result.columns.size(); ++c) {
            if (c) out += ", ";
            out += "'" + result.columns[c] + "': " + python_repr(result.rows[r][c]);
        }
        out += "}";
    }
    return out + "]";
}

std::string text_analysis(LlmGateway& llm, const std::string& question, const ExecutionResult& result) {
    return llm.ask(prompts::kTextAnalysis, {{"query", question}, {"result", format_result(result)}},
                   [](const std::string& t) {
                       std::string s = trim(t);
                       if (s.empty()) throw Error(ErrorKind::LlmMalformedOutput, "empty narrative");
                       return s;
                   });
}

nlohmann::json ChartSpec::to_json() const { return option; }

void validate_chart(const ChartSpec& chart) {
    const auto& o = chart.option;
    if (!o.is_object()) invalid_chart("option is not an object");
    for (const auto& [key, value] : o.items()) {
        if (key != "xAxis" && key != "yAxis" && key != "series") invalid_chart("unexpected option key " + key);
    }
    if (!o.contains("series") || !o["series"].is_array() || o["series"].empty()) invalid_chart("series missing");
    for (const auto& s : o["series"]) {
        if (!s.is_object() || !s.contains("data") || !s["data"].is_array()) invalid_chart("series without data");
        if (s.contains("type") && s["type"] != to_string(chart.chart_type)) {
            invalid_chart("series type " + s["type"].dump() + " differs from " + std::string(to_string(chart.chart_type)));
        }
    }
    if (chart.chart_type == ChartType::Pie) {
        for (const auto& s : o["series"]) {
            for (const auto& d : s["data"]) {
                if (!d.is_object() || !d.contains("name") || !d.contains("value")) {
                    invalid_chart("pie data must be name/value pairs");
                }
            }
        }
        return;
    }
    if (!o.contains("xAxis") || !o["xAxis"].is_object() || !o["xAxis"].contains("data") ||
        !o["xAxis"]["data"].is_array()) {
        invalid_chart("category axis data missing");
    }
    if (o.contains("yAxis") && !o["yAxis"].is_object()) invalid_chart("yAxis is not an object");
    std::size_t categories = o["xAxis"]["data"].size();
    for (const auto& s : o["series"]) {
        if (s["data"].size() != categories) {
            invalid_chart("series has " + std::to_string(s["data"].size()) + " values for " +
                          std::to_string(categories) + " categories");
        }
    }
}

ChartSpec chart_full(LlmGateway& llm, const std::string& question, ChartType chart_type,
                     const ExecutionResult& result) {
    Bindings b{{"query", question},
               {"chart_type", std::string(to_string(chart_type))},
               {"sql_result", format_result(result)}};
    try {
        return llm.ask(prompts::kChartGeneration, b, [&](const std::string& t) {
            auto j = nlohmann::json::parse(extract_fenced(t, "json"));
            ChartSpec spec;
            spec.chart_type = chart_type;
            if (!j.is_object()) throw Error(ErrorKind::LlmMalformedOutput, "chart option is not an object");
            for (const char* key : {"xAxis", "yAxis", "series"}) {
                if (j.contains(key)) spec.option[key] = j[key];
            }
            if (spec.option.contains("series") && spec.option["series"].is_array()) {
                for (auto& s : spec.option["series"]) {
                    if (s.is_object() && !s.contains("type")) s["type"] = to_string(chart_type);
                }
            }
            try {
                validate_chart(spec);
            } catch (const Error& e) {
                throw Error(ErrorKind::LlmMalformedOutput, e.what());
            }
            return spec;
        });
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::LlmMalformedOutput) throw;
        throw Error(ErrorKind::ChartInvalid, e.what());
    }
}

AxisChoice axis_check(LlmGateway& llm, const std::vector<std::string>& columns, const std::string& column_desc) {
    if (columns.size() < 2) throw Error(ErrorKind::InvalidArgument, "axis check needs at least two columns");
    Bindings b{{"column_name", nlohmann::json(columns).dump()}, {"column_desc", column_desc}};
    return llm.ask(prompts::kAxisChecker, b, [&](const std::string& t) {
        auto j = nlohmann::json::parse(extract_fenced(t, "json"));
        if (!j.is_object() || !j.contains("xAxis") || !j.contains("yAxis") || !j.contains("type")) {
            throw Error(ErrorKind::LlmMalformedOutput, "axis answer lacks xAxis, yAxis or type");
        }
        AxisChoice a;
        a.x = j["xAxis"].get<std::string>();
        a.y = j["yAxis"].get<std::string>();
        for (const auto* name : {&a.x, &a.y}) {
            if (std::find(columns.begin(), columns.end(), *name) == columns.end()) {
                throw Error(ErrorKind::AxisInvalid, "'" + *name + "' is not one of " + nlohmann::json(columns).dump());
            }
        }
        auto type = parse_chart_type(j["type"].get<std::string>());
        if (!type) throw Error(ErrorKind::AxisInvalid, "unknown chart type " + j["type"].dump());
        a.type = *type;
        return a;
    });
}

ChartSpec chart_normalized(const ExecutionResult& result, const AxisChoice& axis) {
    std::size_t xi = column_index(result, axis.x);
    std::size_t yi = column_index(result, axis.y);
    ChartSpec spec;
    spec.chart_type = axis.type;
    auto type = std::string(to_string(axis.type));
    if (axis.type == ChartType::Pie) {
        auto data = nlohmann::json::array();
        for (const auto& row : result.rows) data.push_back({{"name", row[xi]}, {"value", row[yi]}});
        spec.option["series"] = nlohmann::json::array({{{"name", axis.y}, {"type", type}, {"data", data}}});
        return spec;
    }
    auto xs = nlohmann::json::array();
    auto ys = nlohmann::json::array();
    for (const auto& row : result.rows) {
        xs.push_back(row[xi]);
        ys.push_back(row[yi]);
    }
    spec.option["xAxis"] = {{"type", "category"}, {"name", axis.x}, {"data", xs}};
    spec.option["yAxis"] = {{"type", "value"}, {"name", axis.y}};
    spec.option["series"] = nlohmann::json::array({{{"name", axis.y}, {"type", type}, {"data", ys}}});
    return spec;
}

ChartSpec make_chart(LlmGateway& llm, const std::string& question, std::optional<ChartType> hint,
                     const ExecutionResult& result, const std::string& column_desc) {
    if (hint) {
        if (result.columns.size() == 2) return chart_normalized(result, {result.columns[0], result.columns[1], *hint});
        return chart_full(llm, question, *hint, result);
    }
    if (result.columns.size() < 2) return chart_full(llm, question, ChartType::Bar, result);
    return chart_normalized(result, axis_check(llm, result.columns, column_desc));
}

std::optional<std::string> knowledge_gap(const std::string& question, const SchemaLink& link,
                                         const std::vector<RecallHit>& examples,
                                         const std::vector<std::string>& metric_lexicon,
                                         const std::vector<std::string>& known_metrics) {
    std::string q = metric_key(question);
    for (const auto& metric : metric_lexicon) {
        std::string m = metric_key(metric);
        if (m.empty() || q.find(m) == std::string::npos) continue;
        bool known = std::any_of(known_metrics.begin(), known_metrics.end(),
                                 [&](const std::string& k) { return metric_key(k) == m; });
        if (known) continue;
        bool covered = false;
        for (const auto& e : link.entries) {
            for (const auto& f : e.fields) covered = covered || metric_key(f).find(m) != std::string::npos;
        }
        for (const auto& h : examples) {
            covered = covered || metric_key(h.demonstration.query).find(m) != std::string::npos;
        }
        if (!covered) return metric;
    }
    return std::nullopt;
}

nlohmann::json ForecastResult::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& [t, v] : points) pts.push_back({t, v});
    nlohmann::json j{{"points", pts}};
    if (components) {
        j["components"] = {{"trend", {{"intercept", components->intercept}, {"slope", components->slope}}},
                           {"seasonal", components->seasonal}};
    }
    return j;
}

void check_forecast_request(const ForecastRequest& request) {
    if (request.horizon == 0) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
    for (std::size_t i = 0; i < request.series.size(); ++i) {
        const auto& [t, v] = request.series[i];
        if (!std::isfinite(t) || !std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite sample");
        if (i && !(t > request.series[i - 1].first)) {
            throw Error(ErrorKind::InvalidArgument, "timestamps must be strictly increasing");
        }
    }
}

void check_forecast_result(const ForecastRequest& request, const ForecastResult& result) {
    if (result.points.size() != request.horizon) {
        throw Error(ErrorKind::InvalidArgument, "forecast has " + std::to_string(result.points.size()) +
                                                    " points for horizon " + std::to_string(request.horizon));
    }
    double last = request.series.empty() ? -INFINITY : request.series.back().first;
    for (const auto& [t, v] : result.points) {
        if (!(t > last)) throw Error(ErrorKind::InvalidArgument, "forecast timestamps must increase");
        last = t;
    }
}

ForecastResult NaiveForecaster::forecast(const ForecastRequest& request) {
    check_forecast_request(request);
    const auto& s = request.series;
    const std::size_t n = s.size();
    const std::size_t p = request.period > 1 ? request.period : 1;
    const std::size_t need = p > 1 ? 2 * p : 8;
    if (n < need) {
        throw Error(ErrorKind::SeriesTooShort,
                    "need " + std::to_string(need) + " points, got " + std::to_string(n));
    }
    std::vector<double> t_mean(p, 0.0), y_mean(p, 0.0);
    std::vector<std::size_t> count(p, 0);
    for (std::size_t i = 0; i < n; ++i) {
        t_mean[i % p] += s[i].first;
        y_mean[i % p] += s[i].second;
        ++count[i % p];
    }
    for (std::size_t j = 0; j < p; ++j) {
        t_mean[j] /= double(count[j]);
        y_mean[j] /= double(count[j]);
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dt = s[i].first - t_mean[i % p];
        sxy += dt * (s[i].second - y_mean[i % p]);
        sxx += dt * dt;
    }
    double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    std::vector<double> level(p);
    for (std::size_t j = 0; j < p; ++j) level[j] = y_mean[j] - slope * t_mean[j];

    ForecastComponents comp;
    comp.slope = slope;
    for (double c : level) comp.intercept += c;
    comp.intercept /= double(p);
    if (p > 1) {
        for (double c : level) comp.seasonal.push_back(c - comp.intercept);
    }

    double step = (s.back().first - s.front().first) / double(n - 1);
    ForecastResult out;
    for (std::size_t h = 1; h <= request.horizon; ++h) {
        double t = s.back().first + step * double(h);
        out.points.emplace_back(t, slope * t + level[(n - 1 + h) % p]);
    }
    out.components = comp;
    return out;
}

}  // namespace askdata
