#include "askdata/memory.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "askdata/error.hpp"

namespace askdata {

namespace {

std::uint32_t fnv1a32(std::string_view data) {
    std::uint32_t hash = 2166136261u;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 16777619u;
    }
    return hash;
}

constexpr double kNormTolerance = 1e-6;

}  // namespace

Embedding HashedNgramEmbedder::embed(std::string_view text) const {
    std::string norm = to_lower(normalize_whitespace(text));
    if (norm.empty()) throw Error(ErrorKind::InvalidArgument, "cannot embed blank text");
    Embedding v(dimension_, 0.0);
    if (norm.size() < 3) {
        v[fnv1a32(norm) % dimension_] += 1.0;
    } else {
        for (size_t i = 0; i + 3 <= norm.size(); ++i) v[fnv1a32(std::string_view(norm).substr(i, 3)) % dimension_] += 1.0;
    }
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    return v;
}

double inner_product(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::string_view to_string(Origin origin) {
    switch (origin) {
        case Origin::Seed: return "seed";
        case Origin::Sql2Nl: return "sql2nl";
        case Origin::SemanticAug: return "semantic_aug";
        case Origin::D2N: return "d2n";
        case Origin::Feedback: return "feedback";
    }
    return "seed";
}

Origin parse_origin(std::string_view text) {
    for (Origin o : {Origin::Seed, Origin::Sql2Nl, Origin::SemanticAug, Origin::D2N, Origin::Feedback}) {
        if (to_string(o) == text) return o;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown origin '" + std::string(text) + "'");
}

std::string_view to_string(Channel channel) {
    switch (channel) {
        case Channel::Similarity: return "similarity";
        case Channel::Homologous: return "homologous";
        case Channel::SlotKernel: return "slot_kernel";
    }
    return "similarity";
}

std::string demonstration_id(std::string_view domain_id, std::string_view query, std::string_view sql) {
    std::string key;
    key.append(domain_id).push_back('\x1f');
    key.append(query).push_back('\x1f');
    key.append(sql);
    return hex_digest(key);
}

nlohmann::json to_json(const Demonstration& d) {
    nlohmann::json fields = nlohmann::json::array();
    for (const auto& f : d.fields) fields.push_back({f.table, f.column});
    return {{"id", d.id},
            {"query", d.query},
            {"sql", d.sql},
            {"tables", std::vector<std::string>(d.tables.begin(), d.tables.end())},
            {"fields", fields},
            {"domain_id", d.domain_id},
            {"origin", to_string(d.origin)},
            {"embedding", d.embedding}};
}

Demonstration demonstration_from_json(const nlohmann::json& j) {
    Demonstration d;
    d.id = j.value("id", "");
    d.query = j.at("query").get<std::string>();
    d.sql = j.at("sql").get<std::string>();
    for (const auto& t : j.value("tables", nlohmann::json::array())) d.tables.insert(t.get<std::string>());
    for (const auto& f : j.value("fields", nlohmann::json::array())) {
        d.fields.insert(ColumnRef{f.at(0).get<std::string>(), f.at(1).get<std::string>()});
    }
    d.domain_id = j.at("domain_id").get<std::string>();
    d.origin = parse_origin(j.value("origin", "seed"));
    d.embedding = j.value("embedding", Embedding{});
    return d;
}

MemoryStore::MemoryStore(std::shared_ptr<const Embedder> embedder, double homologous_threshold)
    : embedder_(std::move(embedder)), homologous_threshold_(homologous_threshold) {
    if (!embedder_) throw Error(ErrorKind::InvalidArgument, "memory store needs an embedder");
}

std::shared_ptr<MemoryStore> MemoryStore::clone() const {
    auto copy = std::make_shared<MemoryStore>(embedder_, homologous_threshold_);
    std::shared_lock lock(mutex_);
    copy->records_ = records_;
    copy->ledger_ = ledger_;
    return copy;
}

std::string MemoryStore::upsert(Demonstration demo) {
    if (trim(demo.query).empty()) throw Error(ErrorKind::InvalidArgument, "demonstration query is empty");
    if (demo.embedding.empty()) demo.embedding = embedder_->embed(demo.query);
    if (demo.embedding.size() != embedder_->dimension()) {
        throw Error(ErrorKind::DimensionMismatch, "embedding has dimension " + std::to_string(demo.embedding.size()) +
                                                      ", store expects " + std::to_string(embedder_->dimension()));
    }
    double norm2 = 0.0;
    for (double x : demo.embedding) norm2 += x * x;
    if (std::fabs(std::sqrt(norm2) - 1.0) > kNormTolerance) {
        throw Error(ErrorKind::InvalidArgument, "embedding is not unit length");
    }
    demo.id = demonstration_id(demo.domain_id, demo.query, demo.sql);
    std::unique_lock lock(mutex_);
    auto [it, inserted] = ledger_.emplace(demo.id, records_.size());
    if (inserted) {
        records_.push_back(std::move(demo));
    } else {
        records_[it->second] = std::move(demo);
    }
    return it->first;
}

std::vector<RecallHit> MemoryStore::search(std::string_view query_text, std::size_t k,
                                           std::string_view domain_id) const {
    return search(embedder_->embed(query_text), k, domain_id);
}

std::vector<RecallHit> MemoryStore::search(const Embedding& query, std::size_t k, std::string_view domain_id) const {
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
    if (query.size() != embedder_->dimension()) {
        throw Error(ErrorKind::DimensionMismatch, "query embedding has dimension " + std::to_string(query.size()));
    }
    std::shared_lock lock(mutex_);
    std::vector<std::pair<double, size_t>> scored;
    for (size_t i = 0; i < records_.size(); ++i) {
        if (records_[i].domain_id != domain_id) continue;
        double s = std::clamp(inner_product(query, records_[i].embedding), -1.0, 1.0);
        scored.emplace_back(s, i);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    if (scored.size() > k) scored.resize(k);
    std::vector<RecallHit> hits;
    hits.reserve(scored.size());
    for (const auto& [score, index] : scored) hits.push_back(RecallHit{records_[index], score, Channel::Similarity});
    return hits;
}

std::optional<LinkedSchema> MemoryStore::homologous_lookup(std::string_view query_text,
                                                           std::string_view domain_id) const {
    auto hits = search(query_text, 1, domain_id);
    if (hits.empty() || hits.front().score < homologous_threshold_) return std::nullopt;
    return LinkedSchema{hits.front().demonstration.tables, hits.front().demonstration.fields};
}

std::size_t MemoryStore::size() const {
    std::shared_lock lock(mutex_);
    return records_.size();
}

std::size_t MemoryStore::size(std::string_view domain_id) const {
    std::shared_lock lock(mutex_);
    return static_cast<size_t>(std::count_if(records_.begin(), records_.end(),
                                             [&](const Demonstration& d) { return d.domain_id == domain_id; }));
}

std::optional<Demonstration> MemoryStore::find(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = ledger_.find(id);
    if (it == ledger_.end()) return std::nullopt;
    return records_[it->second];
}

std::vector<Demonstration> MemoryStore::all() const {
    std::shared_lock lock(mutex_);
    return records_;
}

std::string MemoryStore::to_jsonl() const {
    std::shared_lock lock(mutex_);
    std::string out;
    for (const auto& d : records_) {
        out += to_json(d).dump();
        out.push_back('\n');
    }
    return out;
}

void MemoryStore::load_jsonl(std::string_view text) {
    std::vector<Demonstration> loaded;
    std::istringstream in{std::string(text)};
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            loaded.push_back(demonstration_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Io, "memory line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    {
        std::unique_lock lock(mutex_);
        records_.clear();
        ledger_.clear();
    }
    for (auto& d : loaded) upsert(std::move(d));
}

void MemoryStore::save(const std::string& path) const { write_file(path, to_jsonl()); }

void MemoryStore::load(const std::string& path) { load_jsonl(read_file(path)); }

}  // namespace askdata
