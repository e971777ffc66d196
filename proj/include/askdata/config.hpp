#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "askdata/catalog.hpp"
#include "askdata/engine.hpp"
#include "askdata/llm.hpp"
#include "askdata/memory.hpp"
#include "askdata/pipeline.hpp"
#include "askdata/resultgen.hpp"
#include "askdata/service.hpp"

namespace askdata {

struct ProviderConfig {
    /// "mock" or "http".
    std::string kind = "mock";
    /// Directory of `<template_id>.json` scripts for the mock.
    std::string mock_dir;
    /// Empty falls back to ASKDATA_LLM_BASE_URL. The API key is read from
    /// ASKDATA_LLM_API_KEY only.
    std::string base_url;
    std::string model = "default";
    int timeout_seconds = 60;
};

struct ConnectionProfile {
    std::string name;
    Dialect dialect = Dialect::Embedded;
    std::string dsn = ":memory:";
    /// DDL+INSERT scripts run on open (embedded only).
    std::vector<std::string> scripts;
};

/// Service configuration file (JSON). Relative paths resolve against the
/// directory of the file.
struct AppConfig {
    ProviderConfig provider;
    std::string catalog_path;
    /// Loaded when present; rewritten after accepted feedback.
    std::string memory_path;
    std::size_t embedding_dimension = 256;
    double homologous_threshold = 0.80;
    std::vector<ConnectionProfile> connections;
    std::map<std::string, DomainSettings> domains;
    PipelineOptions pipeline;
    std::string log_dir;
    std::string host = "127.0.0.1";
    int port = 8080;
    /// External forecaster; empty selects the built-in one.
    std::string forecaster_url;

    /// Throws InvalidArgument naming the offending key.
    static AppConfig from_json(const nlohmann::json& doc, const std::string& base_dir = ".");
    /// Throws Io or InvalidArgument.
    static AppConfig load(const std::string& path);
};

std::shared_ptr<LlmProvider> make_provider(const ProviderConfig& config);
std::shared_ptr<Forecaster> make_forecaster(const AppConfig& config);

struct App {
    std::shared_ptr<Catalog> catalog;
    std::shared_ptr<MemoryStore> store;
    std::shared_ptr<LlmGateway> llm;
    std::shared_ptr<ConnectionRegistry> connections;
    std::shared_ptr<Pipeline> pipeline;
    std::shared_ptr<Service> service;
};

/// Wires every component of a configuration. `provider` overrides the
/// configured one when given.
App build_app(const AppConfig& config, std::shared_ptr<LlmProvider> provider = nullptr,
              std::shared_ptr<const Clock> clock = steady_clock());

}  // namespace askdata
