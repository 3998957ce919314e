#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccsinv/ccs_format.hpp"
#include "ccsinv/term.hpp"

namespace ccsinv {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownSymbol : public EvalError {
public:
    using EvalError::EvalError;
};

/// A condition argument or rule result still held a free variable after
/// instantiation; evaluating such rules would require narrowing.
class InstantiationFault : public EvalError {
public:
    using EvalError::EvalError;
};

enum class EvalMode { all, first };

struct EvalStats {
    std::uint64_t rewrite_steps = 0;
    std::uint64_t function_calls = 0;
    std::optional<std::uint64_t> budget;  // max function_calls
    bool exhausted = false;
};

struct EvalOutcome {
    std::vector<std::vector<Term>> results;  // discovery order, duplicates kept
    EvalStats stats;
};

struct EvalOptions {
    EvalMode mode = EvalMode::all;
    std::optional<std::uint64_t> budget;
};

/// Backtracking evaluation of a ground call.
///
/// Every goal dispatch counts one function call; every successful rule
/// application (head matched, all conditions satisfied) counts one rewrite
/// step. Rules are tried in textual order, conditions left to right, and the
/// results of each condition's subgoal are consumed in discovery order. There
/// is no tabling: identical subgoals are solved and counted again.
EvalOutcome evaluate(const System& system, const Query& query, const EvalOptions& options = {});

/// One goal of the search tree with its counters at entry.
struct TraceGoal {
    std::string goal;
    std::uint64_t calls_at_entry = 0;
    std::uint64_t steps_at_entry = 0;
    std::uint64_t results = 0;

    TraceGoal() = default;
    TraceGoal(const TraceGoal&) = delete;
    TraceGoal& operator=(const TraceGoal&) = delete;
    ~TraceGoal();

    struct Attempt {
        std::size_t rule_index = 0;  // 1-based, position in the system's rule list
        bool matched = false;
        // conditions[k] lists every subgoal dispatched for condition k.
        std::vector<std::vector<std::unique_ptr<TraceGoal>>> conditions;
    };
    std::vector<Attempt> attempts;
};

struct Trace {
    std::unique_ptr<TraceGoal> root;
    EvalOutcome outcome;

    std::size_t goal_count() const;
    /// JSON tree: {goal, calls, steps, results, attempts:[{rule, matched, conditions:[[...]]}]}
    std::string to_json(int indent = -1) const;
};

Trace trace(const System& system, const Query& query, std::optional<std::uint64_t> budget = std::nullopt);

/// s^n(0)
Term to_unary(std::uint64_t n);
std::optional<std::uint64_t> from_unary(const Term& t);

}  // namespace ccsinv
