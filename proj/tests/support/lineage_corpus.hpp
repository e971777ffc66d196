#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "askdata/catalog.hpp"

namespace askdata::testing {

/// One query with its lineage worked out by hand.
struct LineageCase {
    std::string name;
    std::string sql;
    Dialect dialect = Dialect::Embedded;
    /// Resolve against fixture_catalog() when true.
    bool with_catalog = true;
    std::vector<std::string> tables;
    std::vector<std::pair<std::string, std::string>> fields;
    std::vector<std::string> unresolved;
};

const std::vector<LineageCase>& lineage_corpus();

inline void PrintTo(const LineageCase& c, std::ostream* os) { *os << c.name; }

}  // namespace askdata::testing
