#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "askdata/augment.hpp"
#include "askdata/catalog.hpp"
#include "askdata/engine.hpp"
#include "askdata/llm.hpp"
#include "askdata/memory.hpp"

namespace askdata {

struct MetricSample {
    std::string question;
    std::string gold_sql;
    /// Empty until a prediction is made.
    std::string pred_sql;
    std::string db_fixture;
    std::string domain_id;
};

/// JSONL, one {question, gold_sql, db_fixture[, domain_id][, pred_sql]} per
/// line. Throws InvalidArgument naming the line when a field is missing or
/// the gold SQL does not parse.
std::vector<MetricSample> read_dataset(std::string_view jsonl, Dialect dialect = Dialect::Embedded);
nlohmann::json to_json(const MetricSample& sample);

/// Named DDL+INSERT scripts, each opened once into its own embedded
/// database on first use.
class FixtureSet {
public:
    explicit FixtureSet(std::map<std::string, std::string> scripts = {}) : scripts_(std::move(scripts)) {}
    void add(const std::string& name, std::string script);
    /// Every `*.sql` file of `dir`, named by file name.
    void add_directory(const std::string& dir);
    bool has(const std::string& name) const;
    /// Throws NotFound, or ExecutionError when the script fails.
    std::shared_ptr<Connection> connection(const std::string& name);

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::string> scripts_;
    std::map<std::string, std::shared_ptr<Connection>> open_;
};

/// Canonical-form equality; unparseable SQL on either side is false.
bool em(const std::string& pred, const std::string& gold, Dialect dialect);

bool has_top_level_order_by(const std::string& sql, Dialect dialect);

/// Position-and-arity comparison of two results, numbers compared by value.
/// Rows form a sequence when `ordered`, a multiset otherwise.
bool ex_compare(const ExecutionResult& a, const ExecutionResult& b, bool ordered);

/// Throws GoldExecutionFailed when the gold query fails; a failing
/// prediction is false.
bool ex(const std::string& pred, const std::string& gold, Connection& db);

struct HaVerdict {
    bool correct = false;
    /// The judge (or the narration) never produced a usable answer.
    bool flagged = false;
    std::string reference_answer;
    std::string candidate_answer;
};

/// Narrates both results, then asks the judge. Throws GoldExecutionFailed.
HaVerdict ha(const std::string& pred, const std::string& gold, const std::string& question, Connection& db,
             LlmGateway& llm);

/// Yes/No, case-insensitive, trailing punctuation ignored. Throws
/// LlmMalformedOutput otherwise.
bool parse_judge_answer(std::string_view text);

enum class Difficulty { Easy, Medium, Challenging };
std::string_view to_string(Difficulty difficulty);
/// <=4 easy, 5-6 medium, >=7 challenging.
Difficulty difficulty_label(int total);

struct DifficultyRating {
    /// Question comprehension, external knowledge, data complexity, SQL
    /// complexity; each 1..3.
    std::array<int, 4> dims{1, 1, 1, 1};
    int total = 4;
    Difficulty label = Difficulty::Easy;
    nlohmann::json to_json() const;
};

DifficultyRating parse_difficulty(std::string_view text);
DifficultyRating difficulty(const std::string& question, const std::string& sql, LlmGateway& llm);

struct SampleVerdict {
    std::size_t index = 0;
    std::string question;
    std::string pred_sql;
    bool em = false;
    bool ex = false;
    std::optional<bool> ha;
    bool ha_flagged = false;
    /// The sample is excluded from N.
    bool gold_failed = false;
    std::string note;
    /// Generation details, filled by the ablation runners.
    bool kernel_included = false;
    std::size_t diagnostics_before_reflection = 0;
    bool reflected = false;
    bool reflection_repaired = false;
    nlohmann::json to_json() const;
};

struct MetricReport {
    std::string label;
    std::size_t n = 0;
    double em = 0.0;
    double ex = 0.0;
    std::optional<double> ha;
    std::vector<SampleVerdict> samples;

    std::size_t gold_failures() const;
    /// n + gold failures == samples, and every fraction matches its count.
    bool reconciles() const;
    nlohmann::json to_json() const;
};

struct MetricOptions {
    Dialect dialect = Dialect::Embedded;
    /// Requires `llm`.
    bool ha = false;
};

/// Scores samples with their pred_sql already set. Samples are independent;
/// the fold follows sample order.
MetricReport evaluate(const std::vector<MetricSample>& samples, FixtureSet& fixtures, const MetricOptions& options,
                      LlmGateway* llm = nullptr, std::string label = {});

/// How predictions are produced in the experiments.
struct GenerationConfig {
    /// Examples per prompt; 0 means zero-shot.
    std::size_t k = 5;
    bool slot_features = false;
    bool reflection = false;
    int max_reflection_rounds = 2;
    std::size_t token_budget = 3000;
};

/// Runs recall, generation and, when enabled and diagnostics exist,
/// reflection for one sample. Failures leave pred_sql empty with a note.
SampleVerdict predict(const MetricSample& sample, const MemoryStore* store, const GenerationConfig& config,
                      const Catalog& catalog, LlmGateway& llm);

enum class Arm { ZeroShot, ER, ER_SA, ER_D2N };
std::string_view to_string(Arm arm);
/// zero_shot, ER, ER_SA, ER_D2N. Throws InvalidArgument.
Arm parse_arm(std::string_view text);

struct ArmStores {
    std::shared_ptr<const MemoryStore> seed;
    std::shared_ptr<const MemoryStore> semantic;
    std::shared_ptr<const MemoryStore> d2n;
};

struct EvalEnvironment {
    const Catalog& catalog;
    LlmGateway& llm;
    FixtureSet& fixtures;
    MetricOptions metrics;
};

/// Rows in arm order.
struct AblationTable {
    std::vector<MetricReport> rows;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Predicts and scores the dataset once per arm. Throws InvalidArgument when
/// an arm's store is missing.
AblationTable run_ablation(const std::vector<MetricSample>& dataset, const std::vector<Arm>& arms,
                           const ArmStores& stores, const GenerationConfig& config, EvalEnvironment& env);

struct PairedReport {
    std::string feature;
    MetricReport with;
    MetricReport without;
    /// Percentage points, with minus without.
    double em_diff = 0.0;
    double ex_diff = 0.0;
    std::optional<double> ha_diff;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

PairedReport paired_ablation(const std::string& feature, const std::vector<MetricSample>& dataset,
                             const MemoryStore* store, const GenerationConfig& with_config,
                             const GenerationConfig& without_config, EvalEnvironment& env);
/// `enabled` false turns the feature off in both arms.
PairedReport slot_ablation(const std::vector<MetricSample>& dataset, const MemoryStore& store,
                           GenerationConfig base, EvalEnvironment& env, bool enabled = true);
PairedReport reflection_ablation(const std::vector<MetricSample>& dataset, const MemoryStore* store,
                                 GenerationConfig base, EvalEnvironment& env, bool enabled = true);

struct RecallSeed {
    std::string question;
    std::string sql;
};

struct RecallPoint {
    std::size_t distractors = 0;
    std::size_t hits = 0;
    std::size_t total = 0;
    double recall = 0.0;
};

struct RecallExperiment {
    std::size_t generated_questions = 0;
    std::vector<RecallPoint> points;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

struct RecallSetup {
    const Catalog& catalog;
    std::string domain_id;
    std::shared_ptr<const Embedder> embedder;
    std::size_t k = 3;
    /// When set, every seed SQL must execute here first.
    Connection* connection = nullptr;
};

/// For each count, indexes the SQL2NL questions of every seed plus the
/// first `count` distractors, then asks each seed question and counts a hit
/// when a top-k demonstration carries the seed's SQL. Throws InvalidArgument
/// when a count exceeds the pool or a seed fails to execute.
RecallExperiment recall_experiment(const std::vector<RecallSeed>& seeds, const std::vector<SeedPair>& distractors,
                                   const std::vector<std::size_t>& counts, LlmGateway& llm,
                                   const RecallSetup& setup);

}  // namespace askdata
