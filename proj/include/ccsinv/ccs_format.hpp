#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ccsinv/term.hpp"

namespace ccsinv {

enum class Severity { error, warning };

struct ParseDiagnostic {
    Severity severity = Severity::error;
    std::size_t line = 1;    // 1-based
    std::size_t column = 1;  // 1-based
    std::string message;

    std::string to_string() const;
};

struct ParseResult {
    std::optional<System> system;
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return system.has_value(); }
};

/// Thrown by the *_or_throw helpers; carries the first error position.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(std::vector<ParseDiagnostic> diags);
    const std::vector<ParseDiagnostic>& diagnostics() const { return diags_; }

private:
    std::vector<ParseDiagnostic> diags_;
};

/// Parses the `(VAR ...) [(CONSTRUCTORS ...)] (RULES ...)` container.
ParseResult parse(std::string_view text);
System parse_or_throw(std::string_view text);

/// Parses a ground call `f(t1,...,tn)` against a system; every identifier
/// inside the arguments is read as a constructor.
struct Query {
    std::string fn;
    std::vector<Term> args;
};
Query parse_query(std::string_view text);

/// Parses a single constructor term (no variables).
Term parse_ground_term(std::string_view text);

std::string print(const System& system);
std::string to_latex(const System& system);

/// Splits `ack{1,2}{1}` into base `ack` and io-set pairs; names without a
/// suffix yield an empty pair list.
struct SplitName {
    std::string base;
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> iosets;
};
std::optional<SplitName> split_name(std::string_view name);

}  // namespace ccsinv
