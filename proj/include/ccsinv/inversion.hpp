#pragma once

#include <compare>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ccsinv/term.hpp"

namespace ccsinv {

/// Input and output index sets, 1-based and ascending. The indices select
/// which original inputs and outputs become inputs of the inverse.
struct IOSet {
    std::vector<std::size_t> in;
    std::vector<std::size_t> out;

    auto operator<=>(const IOSet&) const = default;
};

/// A request for one inverse of a defined symbol of the original system.
struct Demand {
    std::string symbol;
    std::size_t arity_in = 0;
    std::size_t arity_out = 0;
    IOSet ioset;

    bool is_trivial() const;  // I = all inputs, O = {}
    bool is_full() const;     // I = {},         O = all outputs
    bool is_partial() const;  // O = all outputs
    bool valid() const;

    bool operator==(const Demand& o) const { return symbol == o.symbol && ioset == o.ioset; }
    auto operator<=>(const Demand& o) const
    {
        if (auto c = symbol <=> o.symbol; c != 0)
            return c;
        return ioset <=> o.ioset;
    }

    std::string to_string() const;
};

Demand make_demand(const std::string& symbol, std::size_t arity_in, std::size_t arity_out,
                   std::vector<std::size_t> in, std::vector<std::size_t> out);

/// `rem{}{1,2}`-style name; trivial demands keep the original name.
std::string inverse_name(const Demand& demand);

class InversionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ContractViolation : public InversionError {
public:
    using InversionError::InversionError;
};

class DuplicateInverter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct InvertedRule {
    Rule rule;
    std::vector<Demand> demands;  // one per condition, in inverted condition order
    std::vector<std::string> warnings;
};

/// A well-behaved rule inverter: rule + demand in, inverted rule + demands out.
class RuleInverter {
public:
    virtual ~RuleInverter() = default;
    virtual std::string name() const = 0;
    virtual bool admits(const Demand& demand) const = 0;
    virtual InvertedRule invert(const Rule& rule, const Demand& demand) const = 0;
};

std::unique_ptr<RuleInverter> make_trivial_inverter();
std::unique_ptr<RuleInverter> make_full_inverter();
std::unique_ptr<RuleInverter> make_partial_inverter();
std::unique_ptr<RuleInverter> make_semi_inverter();

/// Name → inverter lookup. Populated before use, then only read.
class InverterRegistry {
public:
    /// Registry holding trivial, full, partial and semi.
    static InverterRegistry with_builtins();
    static const InverterRegistry& builtins();

    void register_inverter(std::string name, std::shared_ptr<const RuleInverter> inverter);
    const RuleInverter* find(std::string_view name) const;
    const RuleInverter& get(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, std::shared_ptr<const RuleInverter>, std::less<>> inverters_;
};

/// Inverts one rule and checks the result against the inverter contract:
/// the head symbol must be inverse_name(demand) and the head terms must be a
/// permutation of the source head terms.
InvertedRule invert_rule(const Rule& rule, const Demand& demand, std::string_view inverter,
                         const InverterRegistry& registry = InverterRegistry::builtins());

struct InversionTask {
    Demand root;
    std::string inverter;
};

struct InversionReport {
    System produced;
    std::vector<Demand> demands_resolved;  // in the order their rules appear in `produced`
    std::vector<std::string> warnings;
};

/// Polyvariant inversion: resolves the root demand and every demand emitted
/// while inverting, depth first in emission order, until no demand is open.
InversionReport invert_system(const System& system, const InversionTask& task,
                              const InverterRegistry& registry = InverterRegistry::builtins());

/// Builds a task from a symbol name and index sets, checking ranges and
/// admissibility. Throws InversionError.
InversionTask make_task(const System& system, const std::string& fn, std::vector<std::size_t> in,
                        std::vector<std::size_t> out, std::string inverter,
                        const InverterRegistry& registry = InverterRegistry::builtins());

}  // namespace ccsinv
