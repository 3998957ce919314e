#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ccsinv/term.hpp"

namespace ccsinv {

/// Evidence for a failed property. `rules` are 1-based positions among the
/// rules of `symbol`.
struct Witness {
    std::string symbol;
    std::vector<std::size_t> rules;
    std::string detail;
};

struct PropertyResult {
    std::string name;
    bool holds = true;
    std::vector<Witness> witnesses;  // non-empty iff !holds
};

struct PropertyReport {
    std::vector<PropertyResult> properties;

    const PropertyResult& get(const std::string& name) const;
    bool holds(const std::string& name) const { return get(name).holds; }
    std::string to_text() const;
};

/// Row order of every report and comparison table.
const std::vector<std::string>& property_names();

/// Syntactic paradigm analysis. "functional" and "reversible" are
/// sufficient conditions, not decisions of the semantic properties.
PropertyReport analyze(const System& system);

/// Full inverse of every defined symbol, merged into one system.
System full_inverse(const System& system);

struct ComparisonTable {
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::vector<std::vector<bool>> cells;  // cells[row][column]

    bool at(const std::string& row, const std::string& column) const;
    std::string render() const;
};

ComparisonTable compare(const std::vector<std::pair<std::string, System>>& systems);

}  // namespace ccsinv
