#include "askdata/config.hpp"

#include <cstdlib>
#include <filesystem>

#include "askdata/error.hpp"

namespace askdata {

namespace {

namespace fs = std::filesystem;

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || path == ":memory:") return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).lexically_normal().string();
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("config key '") + key + "': " + e.what());
    }
}

PipelineOptions pipeline_options(const nlohmann::json& j) {
    PipelineOptions o;
    o.k = get_or<std::size_t>(j, "k", o.k);
    o.token_budget = get_or<std::size_t>(j, "token_budget", o.token_budget);
    o.max_reflection_rounds = get_or<int>(j, "max_reflection_rounds", o.max_reflection_rounds);
    o.row_limit = get_or<std::size_t>(j, "row_limit", o.row_limit);
    o.slot_features = get_or<bool>(j, "slot_features", o.slot_features);
    o.reflection = get_or<bool>(j, "reflection", o.reflection);
    o.zero_shot = get_or<bool>(j, "zero_shot", o.zero_shot);
    o.deadline = std::chrono::milliseconds(get_or<long long>(j, "deadline_ms", o.deadline.count()));
    if (j.contains("recall")) {
        const auto& r = j["recall"];
        o.recall.strategy =
            parse_schema_text_strategy(get_or<std::string>(r, "strategy", std::string(to_string(o.recall.strategy))));
        o.recall.similarity_top_n = get_or<std::size_t>(r, "similarity_top_n", o.recall.similarity_top_n);
        o.recall.use_similarity = get_or<bool>(r, "use_similarity", o.recall.use_similarity);
        o.recall.use_homologous = get_or<bool>(r, "use_homologous", o.recall.use_homologous);
    }
    return o;
}

DomainSettings domain_settings(const nlohmann::json& j) {
    DomainSettings d;
    const auto parameters = get_or<nlohmann::json>(j, "parameters", nlohmann::json::array());
    for (const auto& p : parameters) {
        d.parameters.push_back({p.at("name").get<std::string>(),
                                p.at("acceptable_values").get<std::vector<std::string>>()});
    }
    d.metric_lexicon = get_or<std::vector<std::string>>(j, "metric_lexicon", {});
    d.connection = get_or<std::string>(j, "connection", "");
    return d;
}

}  // namespace

AppConfig AppConfig::from_json(const nlohmann::json& doc, const std::string& base_dir) {
    if (!doc.is_object()) throw Error(ErrorKind::InvalidArgument, "config must be a JSON object");
    AppConfig c;
    try {
        if (doc.contains("provider")) {
            const auto& p = doc["provider"];
            c.provider.kind = get_or<std::string>(p, "kind", c.provider.kind);
            if (c.provider.kind != "mock" && c.provider.kind != "http") {
                throw Error(ErrorKind::InvalidArgument, "provider.kind must be mock or http");
            }
            if (p.contains("api_key")) {
                throw Error(ErrorKind::InvalidArgument, "provider credentials belong in ASKDATA_LLM_API_KEY");
            }
            c.provider.mock_dir = resolve(base_dir, get_or<std::string>(p, "mock_dir", ""));
            c.provider.base_url = get_or<std::string>(p, "base_url", "");
            c.provider.model = get_or<std::string>(p, "model", c.provider.model);
            c.provider.timeout_seconds = get_or<int>(p, "timeout_seconds", c.provider.timeout_seconds);
        }
        c.catalog_path = resolve(base_dir, get_or<std::string>(doc, "catalog", ""));
        if (c.catalog_path.empty()) throw Error(ErrorKind::InvalidArgument, "config key 'catalog' is required");
        c.memory_path = resolve(base_dir, get_or<std::string>(doc, "memory", ""));
        c.embedding_dimension = get_or<std::size_t>(doc, "embedding_dimension", c.embedding_dimension);
        c.homologous_threshold = get_or<double>(doc, "homologous_threshold", c.homologous_threshold);
        const auto connections = get_or<nlohmann::json>(doc, "connections", nlohmann::json::object());
        for (const auto& [name, profile] : connections.items()) {
            ConnectionProfile cp;
            cp.name = name;
            cp.dialect = parse_dialect(get_or<std::string>(profile, "dialect", "embedded"));
            cp.dsn = resolve(base_dir, get_or<std::string>(profile, "dsn", ":memory:"));
            for (const auto& s : get_or<std::vector<std::string>>(profile, "scripts", {})) {
                cp.scripts.push_back(resolve(base_dir, s));
            }
            c.connections.push_back(std::move(cp));
        }
        const auto domains = get_or<nlohmann::json>(doc, "domains", nlohmann::json::object());
        for (const auto& [id, d] : domains.items()) {
            c.domains[id] = domain_settings(d);
        }
        c.pipeline = pipeline_options(get_or<nlohmann::json>(doc, "pipeline", nlohmann::json::object()));
        if (doc.contains("service")) {
            const auto& s = doc["service"];
            c.log_dir = resolve(base_dir, get_or<std::string>(s, "log_dir", ""));
            c.host = get_or<std::string>(s, "host", c.host);
            c.port = get_or<int>(s, "port", c.port);
        }
        c.forecaster_url = get_or<std::string>(doc, "forecaster_url", "");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
    }
    return c;
}

AppConfig AppConfig::load(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, path + ": " + e.what());
    }
    auto dir = fs::path(path).parent_path().string();
    return from_json(doc, dir.empty() ? "." : dir);
}

std::shared_ptr<LlmProvider> make_provider(const ProviderConfig& config) {
    if (config.kind == "http") {
        if (config.base_url.empty()) return HttpChatProvider::from_environment();
        const char* key = std::getenv("ASKDATA_LLM_API_KEY");
        return std::make_shared<HttpChatProvider>(config.base_url, key ? key : "", config.model,
                                                  config.timeout_seconds);
    }
    auto mock = std::make_shared<MockProvider>();
    if (!config.mock_dir.empty()) mock->load_dir(config.mock_dir);
    return mock;
}

std::shared_ptr<Forecaster> make_forecaster(const AppConfig& config) {
    if (config.forecaster_url.empty()) return std::make_shared<NaiveForecaster>();
    return std::make_shared<HttpForecaster>(config.forecaster_url);
}

App build_app(const AppConfig& config, std::shared_ptr<LlmProvider> provider, std::shared_ptr<const Clock> clock) {
    App app;
    app.catalog = std::make_shared<Catalog>(Catalog::load(config.catalog_path));
    app.store = std::make_shared<MemoryStore>(std::make_shared<HashedNgramEmbedder>(config.embedding_dimension),
                                              config.homologous_threshold);
    if (!config.memory_path.empty() && fs::exists(config.memory_path)) app.store->load(config.memory_path);
    app.llm = std::make_shared<LlmGateway>(provider ? std::move(provider) : make_provider(config.provider));
    app.connections = std::make_shared<ConnectionRegistry>();
    for (const auto& profile : config.connections) {
        auto connection = open_connection(profile.dialect, profile.dsn);
        for (const auto& script : profile.scripts) connection->execute_script(read_file(script));
        app.connections->add(profile.name, connection);
    }
    for (const auto& entry : config.domains) {
        if (!app.catalog->has_domain(entry.first)) throw Error(ErrorKind::UnknownDomain, "config domain " + entry.first);
    }
    app.pipeline = std::make_shared<Pipeline>(app.catalog, app.store, app.llm, app.connections, config.domains,
                                              config.pipeline, clock);
    app.service = std::make_shared<Service>(app.pipeline, ServiceOptions{config.log_dir, config.memory_path}, clock);
    return app;
}

}  // namespace askdata
