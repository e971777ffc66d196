#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "askdata/catalog.hpp"
#include "askdata/llm.hpp"
#include "askdata/memory.hpp"

namespace askdata {

struct SeedPair {
    std::string query;
    std::string sql;
    std::string domain_id;
    bool vetted = true;
};

nlohmann::json to_json(const SeedPair& pair);
SeedPair seed_pair_from_json(const nlohmann::json& j);
/// JSONL, one {query, sql, domain_id[, vetted]} per line.
std::vector<SeedPair> read_seed_pairs(std::string_view jsonl);
std::string write_seed_pairs(const std::vector<SeedPair>& pairs);

/// Items of a numbered ("1." / "1)") or bulleted ("-" / "*" / "•") list.
/// Lines that are neither are ignored unless no line is marked, in which
/// case every non-empty line counts.
std::vector<std::string> parse_question_list(std::string_view text);

/// Exactly three questions for `sql`, all sharing it.
/// Throws NotParsed when `sql` does not parse, LlmMalformedOutput otherwise.
std::vector<SeedPair> sql2nl(LlmGateway& llm, const std::string& sql, const std::string& table_info,
                             const std::string& domain_id, Dialect dialect);

/// A rewording that differs from `query` after whitespace normalization.
std::string semantic_augment(LlmGateway& llm, const std::string& query);

/// Generated pairs, all unvetted.
std::vector<SeedPair> domain_to_nlsql(LlmGateway& llm, const std::vector<TableSchema>& schemas,
                                      const std::string& domain_id, std::size_t count);

/// Lineage-annotated demonstration for a pair whose SQL validates clean
/// against the catalog. Throws NotParsed, or InvalidArgument listing the
/// diagnostics.
Demonstration prepare_demonstration(const SeedPair& pair, Origin origin, const Catalog& catalog);

struct BuildOptions {
    bool semantic = false;
    /// Rewordings requested per accepted seed.
    std::size_t semantic_rounds = 1;
    /// SQL statements to cold-start through SQL2NL.
    std::vector<std::string> sql2nl;
    /// Domain-to-NL&SQL pairs; only vetted ones are indexed.
    std::vector<SeedPair> d2n;
};

struct BuildReject {
    std::string query;
    std::string sql;
    Origin origin = Origin::Seed;
    std::string reason;
};

struct BuildReport {
    std::string domain_id;
    /// Seed pairs plus D2N pairs handed in.
    std::size_t inputs = 0;
    /// Semantic rewordings requested, plus three per SQL2NL statement that
    /// produced questions and one per statement that did not.
    std::size_t augmentations_attempted = 0;
    std::map<Origin, std::size_t> accepted;
    std::vector<BuildReject> rejects;

    std::size_t accepted_total() const;
    /// accepted + rejected == inputs + augmentations attempted.
    bool reconciles() const;
    nlohmann::json to_json() const;
};

/// Offline phase: validates and indexes seeds, runs the requested
/// augmentations and upserts everything into `store`. Per-record failures
/// become rejects; the batch never aborts. `llm` may be null when no
/// augmentation is requested. Throws UnknownDomain.
BuildReport build_offline(const std::string& domain_id, const std::vector<SeedPair>& seeds,
                          const BuildOptions& options, const Catalog& catalog, MemoryStore& store, LlmGateway* llm);

}  // namespace askdata
