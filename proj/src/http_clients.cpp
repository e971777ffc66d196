#include <cstdlib>

#include <httplib.h>

#include "askdata/common.hpp"
#include "askdata/http_util.hpp"
#include "askdata/llm.hpp"
#include "askdata/resultgen.hpp"

namespace askdata {

HttpChatProvider::HttpChatProvider(std::string base_url, std::string api_key, std::string model, int timeout_seconds)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)),
      timeout_seconds_(timeout_seconds) {}

std::shared_ptr<HttpChatProvider> HttpChatProvider::from_environment() {
    const char* base = std::getenv("ASKDATA_LLM_BASE_URL");
    if (!base || !*base) throw Error(ErrorKind::NotConfigured, "ASKDATA_LLM_BASE_URL is not set");
    const char* key = std::getenv("ASKDATA_LLM_API_KEY");
    const char* model = std::getenv("ASKDATA_LLM_MODEL");
    return std::make_shared<HttpChatProvider>(base, key ? key : "", model ? model : "default");
}

CompletionResponse HttpChatProvider::complete(const CompletionRequest& request) {
    HttpEndpoint endpoint = split_url(base_url_);
    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(timeout_seconds_);
    client.set_read_timeout(timeout_seconds_);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    nlohmann::json body = {{"model", model_},
                           {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
                           {"temperature", request.temperature},
                           {"max_tokens", request.max_output_tokens}};
    auto res = client.Post(endpoint.path + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
        if (res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout) {
            throw Error(ErrorKind::Timeout, "llm endpoint " + base_url_);
        }
        throw Error(ErrorKind::ProviderUnavailable, "llm endpoint " + base_url_ + ": " + httplib::to_string(res.error()));
    }
    if (res->status >= 500 || res->status == 429) {
        throw Error(ErrorKind::ProviderUnavailable, "llm endpoint returned HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw Error(ErrorKind::LlmMalformedOutput, "llm endpoint returned HTTP " + std::to_string(res->status));
    }
    try {
        auto j = nlohmann::json::parse(res->body);
        CompletionResponse out;
        out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        out.provider_metadata = {{"provider", "http"}, {"model", j.value("model", model_)}};
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::LlmMalformedOutput, std::string("llm endpoint response: ") + e.what());
    }
}

HttpForecaster::HttpForecaster(std::string url, std::chrono::seconds timeout)
    : url_(std::move(url)), timeout_(timeout) {
    split_url(url_);
}

ForecastResult HttpForecaster::forecast(const ForecastRequest& request) {
    check_forecast_request(request);
    HttpEndpoint endpoint = split_url(url_);
    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    nlohmann::json series = nlohmann::json::array();
    for (const auto& [t, v] : request.series) series.push_back({t, v});
    nlohmann::json body{{"series", series}, {"horizon", request.horizon}, {"period", request.period}};
    auto res = client.Post(endpoint.path.empty() ? "/" : endpoint.path, body.dump(), "application/json");
    if (!res) throw Error(ErrorKind::ProviderUnavailable, "forecaster " + url_ + ": " + httplib::to_string(res.error()));
    if (res->status != 200) {
        throw Error(ErrorKind::ProviderUnavailable, "forecaster returned HTTP " + std::to_string(res->status));
    }
    ForecastResult out;
    try {
        auto j = nlohmann::json::parse(res->body);
        for (const auto& p : j.at("points")) out.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("forecaster response: ") + e.what());
    }
    check_forecast_result(request, out);
    return out;
}

}  // namespace askdata
