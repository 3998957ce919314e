#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccsinv {

/// Raised when a caller passes tuples of different lengths or a symbol is
/// used with the wrong number of arguments.
class ArityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Immutable first-order term: either a variable or a constructor
/// application. Copies share structure.
class Term {
public:
    static Term var(std::string name);
    static Term app(std::string ctor, std::vector<Term> args = {});

    bool is_var() const { return node_->is_var; }
    const std::string& name() const { return node_->name; }
    std::span<const Term> args() const { return node_->args; }
    std::size_t arity() const { return node_->args.size(); }

    bool is_ground() const;
    void collect_vars(std::set<std::string>& out) const;
    /// Variables in order of first occurrence (left to right, depth first).
    void collect_vars_ordered(std::vector<std::string>& out) const;
    bool occurs(const std::string& var) const;

    std::string to_string() const;

    friend bool operator==(const Term& a, const Term& b);
    friend std::strong_ordering operator<=>(const Term& a, const Term& b);

private:
    struct Node {
        bool is_var;
        std::string name;
        std::vector<Term> args;
    };
    explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

std::set<std::string> vars_of(std::span<const Term> terms);
std::string tuple_to_string(std::span<const Term> terms);

enum class SymbolKind { constructor, defined };

struct Symbol {
    std::string name;
    SymbolKind kind = SymbolKind::constructor;
    std::size_t arity_in = 0;   // constructor arity when kind == constructor
    std::size_t arity_out = 0;  // always 0 for constructors

    bool operator==(const Symbol&) const = default;
};

using Signature = std::map<std::string, Symbol>;

class Substitution {
public:
    Substitution() = default;

    bool empty() const { return map_.empty(); }
    std::size_t size() const { return map_.size(); }
    const Term* find(const std::string& var) const;
    void bind(const std::string& var, Term value) { map_.insert_or_assign(var, std::move(value)); }
    const std::map<std::string, Term>& bindings() const { return map_; }

    Term apply(const Term& t) const;
    std::vector<Term> apply(std::span<const Term> ts) const;

    /// Composition: result applied to t equals other.apply(this->apply(t)).
    Substitution then(const Substitution& other) const;

    bool operator==(const Substitution&) const = default;

private:
    std::map<std::string, Term> map_;
};

struct Condition {
    std::string fn;
    std::vector<Term> args;
    std::vector<Term> results;

    bool operator==(const Condition&) const = default;
};

/// f(params) -> <results> <= conditions
struct Rule {
    std::string fn;
    std::vector<Term> params;
    std::vector<Term> results;
    std::vector<Condition> conditions;

    std::set<std::string> vars() const;
    std::vector<std::string> vars_ordered() const;
    std::string to_string() const;

    bool operator==(const Rule&) const = default;
};

struct System {
    Signature signature;
    std::vector<Rule> rules;

    const Symbol* find(const std::string& name) const;
    std::vector<const Rule*> rules_of(const std::string& fn) const;
    /// Defined symbols in order of their first rule.
    std::vector<std::string> defined_in_order() const;
};

/// Rebuild a signature from rules alone: heads of rules and conditions are
/// defined, everything else is a constructor. Throws ArityError on
/// inconsistent use.
Signature infer_signature(std::span<const Rule> rules);
System make_system(std::vector<Rule> rules);

std::optional<Substitution> match(const Term& pattern, const Term& subject);
/// Extends `into` in place; returns false on failure (into is then unspecified).
bool match_into(const Term& pattern, const Term& subject, Substitution& into);
std::optional<Substitution> match_tuple(std::span<const Term> patterns,
                                        std::span<const Term> subjects);

std::optional<Substitution> unify(const Term& a, const Term& b);
std::optional<Substitution> unify_tuple(std::span<const Term> as, std::span<const Term> bs);

Rule rename_apart(const Rule& rule, const std::set<std::string>& avoid);
Rule rename_vars(const Rule& rule, const std::map<std::string, std::string>& renaming);

bool alpha_equal(const Rule& a, const Rule& b);
bool alpha_equal(const System& a, const System& b);
bool alpha_equal(std::span<const Rule> a, std::span<const Rule> b);

}  // namespace ccsinv
