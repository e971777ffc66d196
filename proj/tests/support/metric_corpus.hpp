#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "askdata/evalharness.hpp"

namespace askdata::testing {

/// Fixture name every metric sample runs against: all toy scripts.
inline constexpr const char* kToyFixture = "toy.sql";

struct HandSample {
    std::string question;
    std::string gold;
    std::string pred;
    bool em = false;
    bool ex = false;
    /// Scripted judge reply.
    std::string judge;
    bool ha = false;
    bool ha_flagged = false;
};

/// Hand-built pairs over the toy fixture with their expected verdicts.
/// Questions carry a unique "[Qnn]" tag.
std::vector<HandSample> hand_samples();

FixtureSet toy_fixtures();

/// Mock answering text_analysis with a fixed sentence and ha_judge per
/// hand sample.
std::shared_ptr<MockProvider> judge_mock(const std::vector<HandSample>& samples);

std::vector<MetricSample> as_metric_samples(const std::vector<HandSample>& samples);

/// A gold query and a cosmetic rewrite of it (keyword case, whitespace,
/// optional keywords, cosmetic aliases, comments, `!=` spelling).
std::pair<std::string, std::string> fuzz_equal_pair(std::uint64_t seed);

}  // namespace askdata::testing
