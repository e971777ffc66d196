#include "askdata/augment.hpp"

#include <cctype>
#include <optional>
#include <sstream>

#include "askdata/error.hpp"
#include "askdata/sql/lineage.hpp"

namespace askdata {

nlohmann::json to_json(const SeedPair& pair) {
    return {{"query", pair.query}, {"sql", pair.sql}, {"domain_id", pair.domain_id}, {"vetted", pair.vetted}};
}

SeedPair seed_pair_from_json(const nlohmann::json& j) {
    SeedPair p;
    p.query = j.at("query").get<std::string>();
    p.sql = j.at("sql").get<std::string>();
    p.domain_id = j.value("domain_id", "");
    p.vetted = j.value("vetted", true);
    return p;
}

std::vector<SeedPair> read_seed_pairs(std::string_view jsonl) {
    std::vector<SeedPair> pairs;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            pairs.push_back(seed_pair_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Io, "seed line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return pairs;
}

std::string write_seed_pairs(const std::vector<SeedPair>& pairs) {
    std::string out;
    for (const auto& p : pairs) out += to_json(p).dump() + "\n";
    return out;
}

namespace {

// Length of a list marker at the start of `line` (0 if none).
size_t marker_length(std::string_view line) {
    if (line.empty()) return 0;
    if (line[0] == '-' || line[0] == '*') return 1;
    if (line.substr(0, 3) == "\xE2\x80\xA2") return 3;  // bullet
    size_t i = 0;
    if (line[0] == 'Q' || line[0] == 'q') i = 1;
    size_t digits = i;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
    if (digits == i || digits >= line.size()) return 0;
    char c = line[digits];
    return (c == '.' || c == ')' || c == ':') ? digits + 1 : 0;
}

std::string strip_quotes(std::string s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
        s = trim(std::string_view(s).substr(1, s.size() - 2));
    }
    return s;
}

}  // namespace

std::vector<std::string> parse_question_list(std::string_view text) {
    std::vector<std::string> marked;
    std::vector<std::string> plain;
    for (const auto& raw : split(text, '\n')) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        size_t m = marker_length(line);
        if (m > 0) {
            std::string item = strip_quotes(trim(std::string_view(line).substr(m)));
            if (!item.empty()) marked.push_back(std::move(item));
        } else {
            plain.push_back(strip_quotes(line));
        }
    }
    return marked.empty() ? plain : marked;
}

std::vector<SeedPair> sql2nl(LlmGateway& llm, const std::string& sql, const std::string& table_info,
                             const std::string& domain_id, Dialect dialect) {
    auto parsed = sql::parse(sql, dialect);
    if (!parsed) throw Error(ErrorKind::NotParsed, parsed.diagnostic().message());
    return llm.ask(prompts::kSql2Nl, {{"table_info", table_info}, {"sql", sql}}, [&](const std::string& text) {
        auto questions = parse_question_list(text);
        if (questions.size() != 3) {
            throw Error(ErrorKind::LlmMalformedOutput,
                        "expected 3 questions, got " + std::to_string(questions.size()));
        }
        std::vector<SeedPair> out;
        for (auto& q : questions) out.push_back(SeedPair{std::move(q), sql, domain_id, true});
        return out;
    });
}

std::string semantic_augment(LlmGateway& llm, const std::string& query) {
    if (trim(query).empty()) throw Error(ErrorKind::InvalidArgument, "query is empty");
    return llm.ask(prompts::kSemanticAugment, {{"query", query}}, [&](const std::string& text) {
        std::string rewritten = strip_quotes(trim(text));
        if (rewritten.empty()) throw Error(ErrorKind::LlmMalformedOutput, "empty rewording");
        if (normalize_whitespace(rewritten) == normalize_whitespace(query)) {
            throw Error(ErrorKind::LlmMalformedOutput, "rewording equals the original");
        }
        return rewritten;
    });
}

std::vector<SeedPair> domain_to_nlsql(LlmGateway& llm, const std::vector<TableSchema>& schemas,
                                      const std::string& domain_id, std::size_t count) {
    if (schemas.empty()) throw Error(ErrorKind::InvalidArgument, "no schemas");
    Bindings b{{"dialect", std::string(to_string(schemas.front().dialect))},
               {"table_info", describe_schemas(schemas)},
               {"count", std::to_string(count)}};
    return llm.ask(prompts::kDomainToNlSql, b, [&](const std::string& text) {
        auto j = nlohmann::json::parse(extract_fenced(text, "json"));
        if (!j.is_array() || j.empty()) throw Error(ErrorKind::LlmMalformedOutput, "expected a non-empty array");
        std::vector<SeedPair> out;
        for (const auto& item : j) {
            SeedPair p;
            p.query = trim(item.at("query").get<std::string>());
            p.sql = trim(item.at("sql").get<std::string>());
            if (p.query.empty() || p.sql.empty()) throw Error(ErrorKind::LlmMalformedOutput, "empty query or sql");
            p.domain_id = domain_id;
            p.vetted = false;
            out.push_back(std::move(p));
        }
        return out;
    });
}

namespace {

std::string diagnostics_text(const std::vector<sql::SqlDiagnostic>& diags) {
    std::vector<std::string> parts;
    for (const auto& d : diags) parts.push_back(d.message());
    return join(parts, "; ");
}

}  // namespace

Demonstration prepare_demonstration(const SeedPair& pair, Origin origin, const Catalog& catalog) {
    Dialect dialect = catalog.domain_dialect(pair.domain_id);
    auto parsed = sql::parse(pair.sql, dialect);
    if (!parsed) throw Error(ErrorKind::NotParsed, parsed.diagnostic().message());
    auto diags = sql::validate(pair.sql, dialect, catalog);
    if (!diags.empty()) throw Error(ErrorKind::InvalidArgument, diagnostics_text(diags));
    sql::Lineage lineage = sql::extract_lineage(parsed.statement(), &catalog);
    Demonstration d;
    d.query = pair.query;
    d.sql = pair.sql;
    d.tables = lineage.tables;
    d.fields = lineage.fields;
    d.domain_id = pair.domain_id;
    d.origin = origin;
    return d;
}

std::size_t BuildReport::accepted_total() const {
    std::size_t n = 0;
    for (const auto& [_, c] : accepted) n += c;
    return n;
}

bool BuildReport::reconciles() const { return accepted_total() + rejects.size() == inputs + augmentations_attempted; }

nlohmann::json BuildReport::to_json() const {
    nlohmann::json counts = nlohmann::json::object();
    for (Origin o : {Origin::Seed, Origin::Sql2Nl, Origin::SemanticAug, Origin::D2N, Origin::Feedback}) {
        auto it = accepted.find(o);
        counts[std::string(to_string(o))] = it == accepted.end() ? 0 : it->second;
    }
    nlohmann::json rejected = nlohmann::json::array();
    for (const auto& r : rejects) {
        rejected.push_back({{"query", r.query}, {"sql", r.sql}, {"origin", to_string(r.origin)}, {"reason", r.reason}});
    }
    return {{"domain_id", domain_id},
            {"inputs", inputs},
            {"augmentations_attempted", augmentations_attempted},
            {"accepted", counts},
            {"accepted_total", accepted_total()},
            {"rejected_total", rejects.size()},
            {"rejects", rejected},
            {"reconciles", reconciles()}};
}

BuildReport build_offline(const std::string& domain_id, const std::vector<SeedPair>& seeds,
                          const BuildOptions& options, const Catalog& catalog, MemoryStore& store, LlmGateway* llm) {
    if (!catalog.has_domain(domain_id)) throw Error(ErrorKind::UnknownDomain, domain_id);
    const bool needs_llm = options.semantic || !options.sql2nl.empty();
    if (needs_llm && !llm) throw Error(ErrorKind::InvalidArgument, "augmentation requested without an LLM");

    BuildReport report;
    report.domain_id = domain_id;
    report.inputs = seeds.size() + options.d2n.size();

    NameSet domain_tables;
    for (const auto& schema : catalog.domain_schemas(domain_id)) domain_tables.insert(schema.table_name);

    auto index = [&](SeedPair pair, Origin origin) -> std::optional<Demonstration> {
        try {
            if (!pair.domain_id.empty() && pair.domain_id != domain_id) {
                throw Error(ErrorKind::InvalidArgument, "pair belongs to domain " + pair.domain_id);
            }
            pair.domain_id = domain_id;
            Demonstration d = prepare_demonstration(pair, origin, catalog);
            for (const auto& t : d.tables) {
                if (!domain_tables.count(t)) {
                    throw Error(ErrorKind::InvalidArgument, "table " + t + " is outside domain " + domain_id);
                }
            }
            store.upsert(d);
            ++report.accepted[origin];
            return d;
        } catch (const Error& e) {
            report.rejects.push_back(BuildReject{pair.query, pair.sql, origin, e.what()});
            return std::nullopt;
        }
    };

    std::vector<Demonstration> accepted_seeds;
    for (const auto& seed : seeds) {
        if (auto d = index(seed, Origin::Seed)) accepted_seeds.push_back(std::move(*d));
    }

    if (options.semantic) {
        for (const auto& seed : accepted_seeds) {
            // Each round rewords the previous round's output.
            std::string source = seed.query;
            for (std::size_t round = 0; round < options.semantic_rounds; ++round) {
                ++report.augmentations_attempted;
                try {
                    source = semantic_augment(*llm, source);
                } catch (const Error& e) {
                    report.rejects.push_back(BuildReject{source, seed.sql, Origin::SemanticAug, e.what()});
                    break;
                }
                index(SeedPair{source, seed.sql, domain_id, true}, Origin::SemanticAug);
            }
        }
    }

    if (!options.sql2nl.empty()) {
        const std::string table_info = describe_schemas(catalog.domain_schemas(domain_id));
        const Dialect dialect = catalog.domain_dialect(domain_id);
        for (const auto& sql_text : options.sql2nl) {
            try {
                auto pairs = sql2nl(*llm, sql_text, table_info, domain_id, dialect);
                report.augmentations_attempted += pairs.size();
                for (auto& p : pairs) index(std::move(p), Origin::Sql2Nl);
            } catch (const Error& e) {
                ++report.augmentations_attempted;
                report.rejects.push_back(BuildReject{"", sql_text, Origin::Sql2Nl, e.what()});
            }
        }
    }

    for (const auto& pair : options.d2n) {
        if (!pair.vetted) {
            report.rejects.push_back(BuildReject{pair.query, pair.sql, Origin::D2N, "unvetted d2n pair"});
            continue;
        }
        index(pair, Origin::D2N);
    }
    return report;
}

}  // namespace askdata
