#include "askdata/common.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "askdata/error.hpp"

namespace askdata {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DuplicateField: return "DuplicateField";
        case ErrorKind::EmptyDescription: return "EmptyDescription";
        case ErrorKind::UnknownDialect: return "UnknownDialect";
        case ErrorKind::UnknownDomain: return "UnknownDomain";
        case ErrorKind::UnknownTable: return "UnknownTable";
        case ErrorKind::NotParsed: return "NotParsed";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorKind::Timeout: return "Timeout";
        case ErrorKind::LlmMalformedOutput: return "LlmMalformedOutput";
        case ErrorKind::MissingBinding: return "MissingBinding";
        case ErrorKind::NoFence: return "NoFence";
        case ErrorKind::BudgetUnsatisfiable: return "BudgetUnsatisfiable";
        case ErrorKind::ReflectionFailed: return "ReflectionFailed";
        case ErrorKind::ExecutionError: return "ExecutionError";
        case ErrorKind::NotConfigured: return "NotConfigured";
        case ErrorKind::ChartInvalid: return "ChartInvalid";
        case ErrorKind::AxisInvalid: return "AxisInvalid";
        case ErrorKind::SeriesTooShort: return "SeriesTooShort";
        case ErrorKind::GoldExecutionFailed: return "GoldExecutionFailed";
        case ErrorKind::NotFound: return "NotFound";
        case ErrorKind::Busy: return "Busy";
        case ErrorKind::Forbidden: return "Forbidden";
        case ErrorKind::Io: return "Io";
        case ErrorKind::Internal: return "Internal";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

std::string trim(std::string_view s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return std::string(s.substr(begin, end - begin));
}

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

bool icontains(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

bool CaseInsensitiveLess::operator()(std::string_view a, std::string_view b) const {
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
        int ca = std::tolower(static_cast<unsigned char>(a[i]));
        int cb = std::tolower(static_cast<unsigned char>(b[i]));
        if (ca != cb) return ca < cb;
    }
    return a.size() < b.size();
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string hex_digest(std::string_view data) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

std::string_view to_string(ChartType type) {
    switch (type) {
        case ChartType::Line: return "line";
        case ChartType::Bar: return "bar";
        case ChartType::Pie: return "pie";
    }
    return "bar";
}

std::optional<ChartType> parse_chart_type(std::string_view text) {
    std::string t = to_lower(trim(text));
    if (t == "line") return ChartType::Line;
    if (t == "bar") return ChartType::Bar;
    if (t == "pie") return ChartType::Pie;
    return std::nullopt;
}

std::chrono::nanoseconds SteadyClock::now() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch());
}

std::shared_ptr<const Clock> steady_clock() {
    static const auto clock = std::make_shared<SteadyClock>();
    return clock;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::Io, "short write to " + path);
}

}  // namespace askdata
