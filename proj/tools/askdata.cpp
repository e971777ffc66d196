#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "askdata/augment.hpp"
#include "askdata/config.hpp"
#include "askdata/error.hpp"
#include "askdata/evalharness.hpp"
#include "askdata/http_server.hpp"
#include "askdata/sql/lineage.hpp"

using namespace askdata;

namespace {

HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

std::vector<std::string> read_statements(const std::string& path) {
    std::vector<std::string> out;
    for (const auto& line : split(read_file(path), '\n')) {
        auto t = trim(line);
        if (!t.empty() && t.rfind("--", 0) != 0) out.push_back(t);
    }
    return out;
}

nlohmann::json lineage_json(const sql::Lineage& l) {
    nlohmann::json fields = nlohmann::json::array();
    for (const auto& f : l.fields) fields.push_back(f.table + "." + f.column);
    return {{"tables", l.tables}, {"fields", fields}, {"unresolved_columns", l.unresolved_columns}};
}

nlohmann::json diagnostics_json(const std::vector<sql::SqlDiagnostic>& ds) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& d : ds) out.push_back({{"kind", std::string(sql::to_string(d.kind))}, {"message", d.message()}});
    return out;
}

std::shared_ptr<MemoryStore> load_store(const AppConfig& config, const std::string& path) {
    auto store = std::make_shared<MemoryStore>(std::make_shared<HashedNgramEmbedder>(config.embedding_dimension),
                                               config.homologous_threshold);
    store->load(path);
    return store;
}

void write_or_print(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text << '\n';
    } else {
        write_file(path, text + "\n");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"askdata: natural-language questions over governed SQL tables"};
    cli.require_subcommand(1);

    std::string config_path = "askdata.json";
    std::string domain;

    auto* offline = cli.add_subcommand("offline", "Build the demonstration memory")->require_subcommand(1);

    auto* build = offline->add_subcommand("build", "Index seed pairs and augmentations");
    std::string seeds_path, sql2nl_path, d2n_path, store_out, report_out;
    std::vector<std::string> augment;
    std::size_t rounds = 1;
    build->add_option("--config", config_path, "Service config file")->check(CLI::ExistingFile);
    build->add_option("--domain", domain, "Domain id")->required();
    build->add_option("--seeds", seeds_path, "Seed pairs (JSONL)")->required()->check(CLI::ExistingFile);
    build->add_option("--augment", augment, "Augmentations to run")->check(CLI::IsMember({"semantic"}));
    build->add_option("--rounds", rounds, "Semantic rewordings per seed");
    build->add_option("--sql2nl", sql2nl_path, "SQL statements to cold-start, one per line")->check(CLI::ExistingFile);
    build->add_option("--d2n", d2n_path, "Vetted domain-to-NL&SQL pairs (JSONL)")->check(CLI::ExistingFile);
    build->add_option("--store", store_out, "Memory file to write (default: config memory)");
    build->add_option("--report", report_out, "Write the build report here");

    auto* d2n = offline->add_subcommand("d2n", "Generate unvetted pairs from the domain schemas");
    std::size_t d2n_count = 10;
    std::string d2n_out;
    d2n->add_option("--config", config_path, "Service config file")->check(CLI::ExistingFile);
    d2n->add_option("--domain", domain, "Domain id")->required();
    d2n->add_option("--count", d2n_count, "Pairs to request");
    d2n->add_option("--out", d2n_out, "Output JSONL")->required();

    auto* vet = offline->add_subcommand("vet", "Review generated pairs; kept pairs are marked vetted");
    std::string vet_in, vet_out;
    std::vector<std::size_t> accept;
    bool accept_all = false;
    vet->add_option("--in", vet_in, "Unvetted pairs (JSONL)")->required()->check(CLI::ExistingFile);
    vet->add_option("--out", vet_out, "Vetted pairs (JSONL)")->required();
    vet->add_option("--accept", accept, "Zero-based indices to keep; prompts when omitted")->delimiter(',');
    vet->add_flag("--all", accept_all, "Keep every pair");

    auto* eval = cli.add_subcommand("eval", "Evaluation harness")->require_subcommand(1);
    auto* run = eval->add_subcommand("run", "Score a dataset, optionally per ablation arm");
    std::string dataset_path, fixtures_dir, seed_store, semantic_store, d2n_store, json_out;
    std::vector<std::string> metrics{"em", "ex"};
    std::vector<std::string> arms;
    GenerationConfig generation;
    run->add_option("--config", config_path, "Service config file")->check(CLI::ExistingFile);
    run->add_option("--dataset", dataset_path, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);
    run->add_option("--fixtures", fixtures_dir, "Directory of *.sql fixtures")->required()->check(CLI::ExistingDirectory);
    run->add_option("--metrics", metrics, "em,ex[,ha]")->delimiter(',')->check(CLI::IsMember({"em", "ex", "ha"}));
    run->add_option("--arms", arms, "zero_shot,ER,ER_SA,ER_D2N")->delimiter(',');
    run->add_option("--seed-store", seed_store, "Memory for ER")->check(CLI::ExistingFile);
    run->add_option("--semantic-store", semantic_store, "Memory for ER_SA")->check(CLI::ExistingFile);
    run->add_option("--d2n-store", d2n_store, "Memory for ER_D2N")->check(CLI::ExistingFile);
    run->add_option("--k", generation.k, "Examples per prompt");
    run->add_flag("--slot-features", generation.slot_features, "Hybrid recall with slot features");
    run->add_flag("--reflection", generation.reflection, "Reflect on invalid SQL");
    run->add_option("--json", json_out, "Write the machine-readable report here");

    auto* rate = eval->add_subcommand("difficulty", "Rate the difficulty of every gold query");
    rate->add_option("--config", config_path, "Service config file")->check(CLI::ExistingFile);
    rate->add_option("--dataset", dataset_path, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);

    auto* serve = cli.add_subcommand("serve", "Run the /v1 HTTP API");
    std::string host;
    int port = -1;
    bool no_recover = false;
    serve->add_option("--config", config_path, "Service config file")->check(CLI::ExistingFile);
    serve->add_option("--host", host, "Listen address (default from config)");
    serve->add_option("--port", port, "Listen port, 0 for any (default from config)");
    serve->add_flag("--no-recover", no_recover, "Ignore existing session logs");

    auto* lineage = cli.add_subcommand("lineage", "Tables and fields a query reads");
    std::string sql_text, dialect_name = "embedded", catalog_path;
    lineage->add_option("sql", sql_text, "SQL text")->required();
    lineage->add_option("--dialect", dialect_name, "SQL dialect");
    lineage->add_option("--catalog", catalog_path, "Catalog used to resolve bare columns")->check(CLI::ExistingFile);

    auto* validate = cli.add_subcommand("validate", "Check a query against a domain's schemas");
    validate->add_option("sql", sql_text, "SQL text")->required();
    validate->add_option("--catalog", catalog_path, "Catalog file")->required()->check(CLI::ExistingFile);
    validate->add_option("--domain", domain, "Domain id")->required();

    auto* forecast = cli.add_subcommand("forecast", "Extend a time series");
    std::string series_path, forecaster_url;
    ForecastRequest request;
    forecast->add_option("--series", series_path, "JSON array of [t, value]")->required()->check(CLI::ExistingFile);
    forecast->add_option("--horizon", request.horizon, "Points to forecast");
    forecast->add_option("--period", request.period, "Seasonal period in samples");
    forecast->add_option("--url", forecaster_url, "External forecaster endpoint");

    CLI11_PARSE(cli, argc, argv);

    try {
        if (build->parsed()) {
            auto config = AppConfig::load(config_path);
            auto app = build_app(config);
            BuildOptions options;
            options.semantic = !augment.empty();
            options.semantic_rounds = rounds;
            if (!sql2nl_path.empty()) options.sql2nl = read_statements(sql2nl_path);
            if (!d2n_path.empty()) options.d2n = read_seed_pairs(read_file(d2n_path));
            auto seeds = read_seed_pairs(read_file(seeds_path));
            auto report = build_offline(domain, seeds, options, *app.catalog, *app.store, app.llm.get());
            auto target = store_out.empty() ? config.memory_path : store_out;
            if (target.empty()) throw Error(ErrorKind::InvalidArgument, "no --store and no memory in the config");
            app.store->save(target);
            std::cout << report.to_json().dump(2) << '\n';
            if (!report_out.empty()) write_file(report_out, report.to_json().dump(2) + "\n");
            return report.reconciles() ? 0 : 1;
        }
        if (d2n->parsed()) {
            auto app = build_app(AppConfig::load(config_path));
            auto pairs = domain_to_nlsql(*app.llm, app.catalog->domain_schemas(domain), domain, d2n_count);
            write_file(d2n_out, write_seed_pairs(pairs));
            std::cout << pairs.size() << " unvetted pairs written to " << d2n_out << '\n';
            return 0;
        }
        if (vet->parsed()) {
            auto pairs = read_seed_pairs(read_file(vet_in));
            std::vector<SeedPair> kept;
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                bool keep = accept_all || std::find(accept.begin(), accept.end(), i) != accept.end();
                if (!accept_all && accept.empty()) {
                    std::cout << "[" << i << "] " << pairs[i].query << "\n    " << pairs[i].sql << "\nkeep? [y/N] "
                              << std::flush;
                    std::string answer;
                    if (!std::getline(std::cin, answer)) break;
                    keep = iequals(trim(answer), "y") || iequals(trim(answer), "yes");
                }
                if (keep) {
                    pairs[i].vetted = true;
                    kept.push_back(pairs[i]);
                }
            }
            write_file(vet_out, write_seed_pairs(kept));
            std::cout << kept.size() << " of " << pairs.size() << " pairs vetted\n";
            return 0;
        }
        if (run->parsed()) {
            auto config = AppConfig::load(config_path);
            auto app = build_app(config);
            auto dataset = read_dataset(read_file(dataset_path));
            FixtureSet fixtures;
            fixtures.add_directory(fixtures_dir);
            MetricOptions metric_options;
            metric_options.ha = std::find(metrics.begin(), metrics.end(), "ha") != metrics.end();
            EvalEnvironment env{*app.catalog, *app.llm, fixtures, metric_options};
            if (!arms.empty()) {
                std::vector<Arm> parsed;
                for (const auto& a : arms) parsed.push_back(parse_arm(a));
                ArmStores stores;
                if (!seed_store.empty()) stores.seed = load_store(config, seed_store);
                if (!semantic_store.empty()) stores.semantic = load_store(config, semantic_store);
                if (!d2n_store.empty()) stores.d2n = load_store(config, d2n_store);
                auto table = run_ablation(dataset, parsed, stores, generation, env);
                std::cout << table.to_text();
                if (!json_out.empty()) write_file(json_out, table.to_json().dump(2) + "\n");
                return 0;
            }
            for (auto& sample : dataset) {
                if (!sample.pred_sql.empty()) continue;
                sample.pred_sql = predict(sample, app.store.get(), generation, *app.catalog, *app.llm).pred_sql;
            }
            auto report = evaluate(dataset, fixtures, metric_options, app.llm.get(), "run");
            std::cout << "N=" << report.n << " EM=" << report.em << " EX=" << report.ex;
            if (report.ha) std::cout << " HA=" << *report.ha;
            std::cout << '\n';
            if (!json_out.empty()) write_file(json_out, report.to_json().dump(2) + "\n");
            return 0;
        }
        if (rate->parsed()) {
            auto app = build_app(AppConfig::load(config_path));
            std::map<std::string, int> counts;
            for (const auto& sample : read_dataset(read_file(dataset_path))) {
                auto r = difficulty(sample.question, sample.gold_sql, *app.llm);
                ++counts[std::string(to_string(r.label))];
                nlohmann::json line{{"question", sample.question}, {"rating", r.to_json()}};
                std::cout << line.dump() << '\n';
            }
            std::cout << nlohmann::json(counts).dump() << '\n';
            return 0;
        }
        if (serve->parsed()) {
            auto config = AppConfig::load(config_path);
            auto app = build_app(config);
            if (!no_recover) std::cerr << app.service->recover() << " sessions recovered\n";
            HttpServer server(app.service);
            int bound = server.bind(host.empty() ? config.host : host, port < 0 ? config.port : port);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on " << (host.empty() ? config.host : host) << ":" << bound << '\n';
            server.serve();
            g_server = nullptr;
            return 0;
        }
        if (lineage->parsed()) {
            std::optional<Catalog> catalog;
            if (!catalog_path.empty()) catalog = Catalog::load(catalog_path);
            auto l = sql::extract_lineage(sql_text, parse_dialect(dialect_name), catalog ? &*catalog : nullptr);
            std::cout << lineage_json(l).dump(2) << '\n';
            return 0;
        }
        if (validate->parsed()) {
            auto catalog = Catalog::load(catalog_path);
            auto ds = sql::validate(sql_text, catalog.domain_dialect(domain), catalog);
            std::cout << diagnostics_json(ds).dump(2) << '\n';
            return ds.empty() ? 0 : 1;
        }
        if (forecast->parsed()) {
            for (const auto& p : nlohmann::json::parse(read_file(series_path))) {
                request.series.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            }
            std::shared_ptr<Forecaster> f;
            if (forecaster_url.empty()) {
                f = std::make_shared<NaiveForecaster>();
            } else {
                f = std::make_shared<HttpForecaster>(forecaster_url);
            }
            std::cout << f->forecast(request).to_json().dump(2) << '\n';
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
