#pragma once

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ccsinv/ccs_format.hpp"
#include "ccsinv/corpus.hpp"
#include "ccsinv/term.hpp"

namespace support {

using namespace ccsinv;

inline System example(std::string_view name)
{
    const Example* e = find_example(name);
    if (!e)
        throw std::runtime_error("missing example " + std::string(name));
    return parse_or_throw(e->text);
}

inline Term T(std::string_view text) { return parse_ground_term(text); }

// Reference inversions of the bundled examples.

inline constexpr const char* kRemFull = R"((VAR x xs y zs i)
(RULES
rem{}{1,2}(x,xs) -> <:(x,xs),0>
rem{}{1,2}(y,:(x,zs)) -> <:(x,xs),s(i)> <= rem{}{1,2}(y,zs) -> <xs,i>
))";

inline constexpr const char* kRemPartial = R"((VAR x xs y zs i)
(RULES
rem{2}{1,2}(0,x,xs) -> <:(x,xs)>
rem{2}{1,2}(s(i),y,:(x,zs)) -> <:(x,xs)> <= rem{2}{1,2}(i,y,zs) -> <xs>
))";

inline constexpr const char* kRemSemi = R"((VAR x xs y zs i)
(RULES
rem{1}{1}(:(x,xs),x) -> <0,xs>
rem{1}{1}(:(x,xs),y) -> <s(i),:(x,zs)> <= rem{1}{1}(xs,y) -> <i,zs>
))";

inline constexpr const char* kAddPartial = R"((VAR x y z)
(RULES
add{1}{1}(0,y) -> <y>
add{1}{1}(s(x),s(z)) -> <y> <= add{1}{1}(x,z) -> <y>
))";

inline constexpr const char* kAckPartial1 = R"((VAR x y z v)
(RULES
ack{1}{1}(0,s(y)) -> <y>
ack{1}{1}(s(x),z) -> <0>    <= ack{1,2}{1}(x,s(0),z) -> <>
ack{1}{1}(s(x),z) -> <s(y)> <= ack{1}{1}(x,z)    -> <v>,
                               ack{1}{1}(s(x),v) -> <y>
ack{1,2}{1}(0,y,s(y))    -> <>
ack{1,2}{1}(s(x),0,z)    -> <> <= ack{1,2}{1}(x,s(0),z) -> <>
ack{1,2}{1}(s(x),s(y),z) -> <> <= ack{1}{1}(x,z) -> <v>,
                                  ack{1,2}{1}(s(x),y,v) -> <>
))";

// Rules of ack{2}{1} and ack{}{1}; the complete system also includes the
// rules of kAckPartial1.
inline constexpr const char* kAckPartial2Head = R"((VAR x y z v)
(RULES
ack{2}{1}(y, s(y)) -> <0>
ack{2}{1}(0, z) -> <s(x)>    <= ack{2}{1}(s(0), z) -> <x>
ack{2}{1}(s(y), z) -> <s(x)> <= ack{}{1}(z) -> <x, v>,
                                ack{1,2}{1}(s(x), y, v) -> < >
ack{}{1}(s(y)) -> <0, y>
ack{}{1}(z) -> <s(x), 0>    <= ack{2}{1}(s(0), z) -> <x>
ack{}{1}(z) -> <s(x), s(y)> <= ack{}{1}(z) -> <x, v>,
                               ack{1}{1}(s(x), v) -> <y>
))";

inline constexpr const char* kAckFull = R"((VAR x y z v)
(RULES
ack{}{1}(s(y)) -> <0, y>
ack{}{1}(z) -> <s(x), 0> <= ack{}{1}(z) -> <x, s(0)>
ack{}{1}(z) -> <s(x), s(y)> <= ack{}{1}(z) -> <x, v>,
                               ack{}{1}(v) -> <s(x), y>
))";

inline System ack_partial2_expected()
{
    System head = parse_or_throw(kAckPartial2Head);
    System tail = parse_or_throw(kAckPartial1);
    head.rules.insert(head.rules.end(), tail.rules.begin(), tail.rules.end());
    return make_system(std::move(head.rules));
}

inline Term list_of(const std::vector<std::string>& elems)
{
    Term t = Term::app("nil");
    for (auto it = elems.rbegin(); it != elems.rend(); ++it)
        t = Term::app(":", {Term::app(*it), t});
    return t;
}

// ---------------------------------------------------------------------------
// Random generators (fixed seeds at call sites).

struct GenConfig {
    std::vector<std::pair<std::string, std::size_t>> ctors{{"0", 0}, {"nil", 0}, {"a", 0}, {"s", 1}, {"c", 2}};
    std::vector<std::string> vars{"x", "y", "z", "u", "v", "w"};
};

inline std::size_t pick(std::mt19937& rng, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline Term random_term(std::mt19937& rng, int depth, bool allow_vars, const GenConfig& cfg = {})
{
    if (allow_vars && (depth == 0 || pick(rng, 3) == 0))
        return Term::var(cfg.vars[pick(rng, cfg.vars.size())]);
    std::vector<std::pair<std::string, std::size_t>> choices;
    for (const auto& c : cfg.ctors)
        if (depth > 0 || c.second == 0)
            choices.push_back(c);
    const auto& [name, arity] = choices[pick(rng, choices.size())];
    std::vector<Term> args;
    for (std::size_t i = 0; i < arity; ++i)
        args.push_back(random_term(rng, depth - 1, allow_vars, cfg));
    return Term::app(name, std::move(args));
}

inline std::vector<Term> random_terms(std::mt19937& rng, std::size_t n, int depth)
{
    std::vector<Term> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(random_term(rng, depth, true));
    return out;
}

/// Well-formed system over symbols f0..f{n-1}. The first rule of f_k calls
/// f_{k+1} first and f_k only calls f_j for j <= k+1, so a depth-first walk
/// from f0 reaches the symbols in index order.
inline System random_system(std::mt19937& rng)
{
    const std::size_t n = 1 + pick(rng, 3);
    std::vector<std::pair<std::size_t, std::size_t>> arity;
    for (std::size_t k = 0; k < n; ++k)
        arity.emplace_back(pick(rng, 3), pick(rng, 3));
    auto name = [](std::size_t k) { return "f" + std::to_string(k); };

    std::vector<Rule> rules;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t nrules = 1 + pick(rng, 3);
        for (std::size_t r = 0; r < nrules; ++r) {
            Rule rule{name(k), random_terms(rng, arity[k].first, 2), random_terms(rng, arity[k].second, 2), {}};
            std::size_t nconds = pick(rng, 3);
            const bool must_call_next = r == 0 && k + 1 < n;
            if (must_call_next && nconds == 0)
                nconds = 1;
            for (std::size_t c = 0; c < nconds; ++c) {
                const std::size_t target = (c == 0 && must_call_next) ? k + 1 : pick(rng, std::min(n, k + 2));
                rule.conditions.push_back({name(target), random_terms(rng, arity[target].first, 1),
                                           random_terms(rng, arity[target].second, 1)});
            }
            rules.push_back(std::move(rule));
        }
    }
    return make_system(std::move(rules));
}

// ---------------------------------------------------------------------------

/// Least-fixpoint semantics of a system, restricted to the goals reachable
/// from the queries asked so far. Unlike depth-first evaluation this is fair:
/// a tuple is found whenever it has a finite derivation and the reachable
/// goal space is finite.
class Fixpoint {
public:
    using Tuple = std::vector<Term>;

    explicit Fixpoint(const System& s, std::size_t max_goals = 200000) : sys_(s), max_goals_(max_goals) {}

    /// All derivable result tuples, or nullopt if the goal space grew past
    /// the cap.
    std::optional<std::set<Tuple>> solve(const std::string& fn, const Tuple& args)
    {
        const std::string root = key(fn, args);
        touch(root, fn, args);
        while (!work_.empty() && !overflow_) {
            const std::string g = work_.front();
            work_.pop_front();
            auto& node = goals_.at(g);
            node.queued = false;
            std::set<Tuple> fresh = step(g, node.fn, node.args);
            auto& cur = goals_.at(g).results;
            if (fresh.size() != cur.size()) {
                cur = std::move(fresh);
                for (const auto& d : goals_.at(g).dependents)
                    enqueue(d);
            }
        }
        if (overflow_)
            return std::nullopt;
        return goals_.at(root).results;
    }

private:
    struct Node {
        std::string fn;
        Tuple args;
        std::set<Tuple> results;
        std::set<std::string> dependents;
        bool queued = false;
    };

    static std::string key(const std::string& fn, const Tuple& args) { return fn + tuple_to_string(args); }

    void enqueue(const std::string& g)
    {
        auto& n = goals_.at(g);
        if (!n.queued) {
            n.queued = true;
            work_.push_back(g);
        }
    }

    void touch(const std::string& k, const std::string& fn, const Tuple& args)
    {
        if (goals_.contains(k))
            return;
        if (goals_.size() >= max_goals_) {
            overflow_ = true;
            return;
        }
        goals_.emplace(k, Node{fn, args, {}, {}, false});
        enqueue(k);
    }

    // One application of the immediate-consequence operator to goal g.
    std::set<Tuple> step(const std::string& g, const std::string& fn, const Tuple& args)
    {
        std::set<Tuple> out = goals_.at(g).results;
        for (const Rule* r : sys_.rules_of(fn)) {
            auto m = match_tuple(r->params, args);
            if (!m)
                continue;
            std::vector<Substitution> frontier{*m};
            for (const auto& c : r->conditions) {
                std::vector<Substitution> next;
                for (const auto& sigma : frontier) {
                    Tuple cargs = sigma.apply(c.args);
                    if (!vars_of(cargs).empty())
                        throw std::runtime_error("free variable in condition of " + r->to_string());
                    const std::string sub = key(c.fn, cargs);
                    touch(sub, c.fn, cargs);
                    if (overflow_)
                        return out;
                    auto& node = goals_.at(sub);
                    node.dependents.insert(g);
                    for (const auto& res : node.results) {
                        Substitution ext = sigma;
                        bool ok = true;
                        for (std::size_t k = 0; k < res.size() && ok; ++k)
                            ok = match_into(ext.apply(c.results[k]), res[k], ext);
                        if (ok)
                            next.push_back(std::move(ext));
                    }
                }
                frontier = std::move(next);
            }
            for (const auto& sigma : frontier)
                out.insert(sigma.apply(r->results));
        }
        return out;
    }

    const System& sys_;
    std::size_t max_goals_;
    std::map<std::string, Node> goals_;
    std::deque<std::string> work_;
    bool overflow_ = false;
};

}  // namespace support
