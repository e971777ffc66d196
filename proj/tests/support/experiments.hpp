#pragma once

#include <memory>
#include <string>
#include <vector>

#include "askdata/augment.hpp"
#include "askdata/evalharness.hpp"

namespace askdata::testing {

/// Catalog, scripted mock, gateway and toy fixtures shared by the
/// experiment corpora below. Each corpus adds its own rules.
struct ExperimentRig {
    std::shared_ptr<Catalog> catalog;
    std::shared_ptr<MockProvider> mock;
    std::shared_ptr<LlmGateway> llm;
    FixtureSet fixtures;

    ExperimentRig();
    EvalEnvironment env(bool with_ha = false);
    std::shared_ptr<MemoryStore> empty_store() const;
};

/// Sales questions answerable only after seeing a GROUP BY example; one
/// question the model answers unaided.
struct AblationCorpus {
    std::vector<MetricSample> dataset;
    std::shared_ptr<MemoryStore> seed;
    std::shared_ptr<MemoryStore> semantic;
    std::shared_ptr<MemoryStore> d2n;

    explicit AblationCorpus(ExperimentRig& rig);
    ArmStores stores() const { return {seed, semantic, d2n}; }
};

/// Closure-rate questions whose kernel demonstration ("What is the
/// closure rate?") sits outside the full-question top-k; generation is
/// right only when the kernel reaches the prompt.
struct SlotCorpus {
    static constexpr std::size_t kK = 3;
    std::vector<MetricSample> dataset;
    std::shared_ptr<MemoryStore> store;
    std::string kernel_id;

    explicit SlotCorpus(ExperimentRig& rig);
};

struct ReflectionCase {
    std::string tag;
    std::string domain;
    std::string kind;
    std::string gold;
    std::string broken;
    /// Reflection answers in round order.
    std::vector<std::string> repairs;
};

/// Twenty seeded-error samples (unknown table, unknown column, syntax) plus
/// five that generate clean SQL.
struct ReflectionCorpus {
    std::vector<ReflectionCase> seeded;
    std::vector<ReflectionCase> clean;
    std::vector<MetricSample> dataset;

    explicit ReflectionCorpus(ExperimentRig& rig);
};

/// Sixteen shop SQLs with their original questions and three scripted
/// SQL2NL rewordings each, plus 200 generated distractors.
struct RecallCorpus {
    std::vector<RecallSeed> seeds;
    std::vector<SeedPair> distractors;

    explicit RecallCorpus(ExperimentRig& rig);
};

}  // namespace askdata::testing
