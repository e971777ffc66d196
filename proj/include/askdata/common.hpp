#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace askdata {

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string trim(std::string_view s);
/// Collapses runs of whitespace into single spaces and trims the ends.
std::string normalize_whitespace(std::string_view s);
bool icontains(std::string_view haystack, std::string_view needle);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

struct CaseInsensitiveLess {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const;
};

using NameSet = std::set<std::string, CaseInsensitiveLess>;

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view data);
std::string hex_digest(std::string_view data);

enum class ChartType { Line, Bar, Pie };

std::string_view to_string(ChartType type);
std::optional<ChartType> parse_chart_type(std::string_view text);

/// Injectable time source so traces can be made byte-deterministic in tests.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::nanoseconds now() const = 0;
};

class SteadyClock final : public Clock {
public:
    std::chrono::nanoseconds now() const override;
};

/// Always reports the same instant.
class FixedClock final : public Clock {
public:
    explicit FixedClock(std::chrono::nanoseconds at = std::chrono::nanoseconds{0}) : at_(at) {}
    std::chrono::nanoseconds now() const override { return at_; }

private:
    std::chrono::nanoseconds at_;
};

std::shared_ptr<const Clock> steady_clock();

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace askdata
