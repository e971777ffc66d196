#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "askdata/catalog.hpp"

namespace askdata {

using Embedding = std::vector<double>;

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dimension() const = 0;
    /// Unit-L2 vector. Throws InvalidArgument on blank text,
    /// ProviderUnavailable when a remote backend is down.
    virtual Embedding embed(std::string_view text) const = 0;
};

/// Bag of hashed character 3-grams (FNV-1a 32 mod dimension) over the
/// lower-cased, whitespace-collapsed text, L2-normalized. Text shorter than
/// three bytes is a single gram.
class HashedNgramEmbedder final : public Embedder {
public:
    explicit HashedNgramEmbedder(std::size_t dimension = 256) : dimension_(dimension) {}
    std::size_t dimension() const override { return dimension_; }
    Embedding embed(std::string_view text) const override;

private:
    std::size_t dimension_;
};

double inner_product(const Embedding& a, const Embedding& b);

enum class Origin { Seed, Sql2Nl, SemanticAug, D2N, Feedback };

std::string_view to_string(Origin origin);
/// Throws InvalidArgument.
Origin parse_origin(std::string_view text);

struct Demonstration {
    std::string id;
    std::string query;
    std::string sql;
    NameSet tables;
    ColumnSet fields;
    std::string domain_id;
    Origin origin = Origin::Seed;
    Embedding embedding;
};

/// Key of the uniqueness index for (domain, query, sql).
std::string demonstration_id(std::string_view domain_id, std::string_view query, std::string_view sql);

nlohmann::json to_json(const Demonstration& d);
Demonstration demonstration_from_json(const nlohmann::json& j);

enum class Channel { Similarity, Homologous, SlotKernel };

std::string_view to_string(Channel channel);

struct RecallHit {
    Demonstration demonstration;
    double score = 0.0;
    Channel channel = Channel::Similarity;
};

struct LinkedSchema {
    NameSet tables;
    ColumnSet fields;
};

/// Demonstration memory: flat inner-product index plus a uniqueness ledger.
/// Searches run against a consistent snapshot; upserts are serialized.
class MemoryStore {
public:
    explicit MemoryStore(std::shared_ptr<const Embedder> embedder, double homologous_threshold = 0.80);

    /// Copies contents and settings into an independent store.
    std::shared_ptr<MemoryStore> clone() const;

    const Embedder& embedder() const { return *embedder_; }
    double homologous_threshold() const { return homologous_threshold_; }

    /// Fills id (and the embedding when empty) and inserts, replacing any
    /// record with the same (domain, query, sql). A replaced record keeps
    /// its position. Throws DimensionMismatch or InvalidArgument (not unit norm).
    std::string upsert(Demonstration demo);

    /// Top-k by inner product within a domain; ties keep insertion order.
    /// Empty store gives an empty list.
    std::vector<RecallHit> search(std::string_view query_text, std::size_t k, std::string_view domain_id) const;
    std::vector<RecallHit> search(const Embedding& query, std::size_t k, std::string_view domain_id) const;

    /// Stored lineage of the nearest demonstration when its score reaches
    /// the homologous threshold.
    std::optional<LinkedSchema> homologous_lookup(std::string_view query_text, std::string_view domain_id) const;

    std::size_t size() const;
    std::size_t size(std::string_view domain_id) const;
    std::optional<Demonstration> find(const std::string& id) const;
    /// Insertion order.
    std::vector<Demonstration> all() const;

    /// One JSON object per line, insertion order.
    std::string to_jsonl() const;
    void load_jsonl(std::string_view text);
    void save(const std::string& path) const;
    void load(const std::string& path);

private:
    std::shared_ptr<const Embedder> embedder_;
    double homologous_threshold_;
    mutable std::shared_mutex mutex_;
    std::vector<Demonstration> records_;
    std::map<std::string, std::size_t> ledger_;  // id -> index into records_
};

}  // namespace askdata
