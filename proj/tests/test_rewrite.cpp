#include <functional>
#include <map>
#include <random>

#include <json.hpp>

#include "doctest.h"
#include "support.hpp"

#include "ccsinv/inversion.hpp"
#include "ccsinv/rewrite.hpp"

using namespace ccsinv;
using support::T;

namespace {

std::uint64_t ackermann(std::uint64_t x, std::uint64_t y)
{
    if (x == 0)
        return y + 1;
    if (y == 0)
        return ackermann(x - 1, 1);
    return ackermann(x - 1, ackermann(x, y - 1));
}

Query call(std::string fn, std::vector<Term> args) { return Query{std::move(fn), std::move(args)}; }

std::vector<std::string> rendered(const EvalOutcome& o)
{
    std::vector<std::string> out;
    for (const auto& r : o.results)
        out.push_back(tuple_to_string(r));
    return out;
}

/// Independent reference semantics: the set of result tuples derivable
/// with conditional rewriting nested at most `depth` deep. Recursive and
/// memoized, sharing no code with the engine beyond matching.
class BruteForce {
public:
    explicit BruteForce(const System& s) : sys_(s) {}

    std::set<std::vector<Term>> solve(const std::string& fn, const std::vector<Term>& args, int depth)
    {
        if (depth <= 0)
            return {};
        std::string key = fn + tuple_to_string(args) + "@" + std::to_string(depth);
        if (auto it = memo_.find(key); it != memo_.end())
            return it->second;
        std::set<std::vector<Term>> out;
        for (const Rule* r : sys_.rules_of(fn)) {
            auto m = match_tuple(r->params, args);
            if (!m)
                continue;
            std::vector<Substitution> frontier{*m};
            for (const auto& c : r->conditions) {
                std::vector<Substitution> next;
                for (const auto& sigma : frontier) {
                    std::vector<Term> cargs = sigma.apply(c.args);
                    if (!vars_of(cargs).empty())
                        throw InstantiationFault("free variable");
                    for (const auto& res : solve(c.fn, cargs, depth - 1)) {
                        Substitution ext = sigma;
                        bool ok = true;
                        for (std::size_t k = 0; k < res.size() && ok; ++k)
                            ok = match_into(sigma.apply(c.results[k]), res[k], ext);
                        if (ok)
                            next.push_back(ext);
                    }
                }
                frontier = std::move(next);
            }
            for (const auto& sigma : frontier) {
                auto res = sigma.apply(r->results);
                if (!vars_of(res).empty())
                    throw InstantiationFault("free variable");
                out.insert(res);
            }
        }
        memo_.emplace(key, out);
        return out;
    }

private:
    const System& sys_;
    std::map<std::string, std::set<std::vector<Term>>> memo_;
};

}  // namespace

TEST_SUITE("rewrite") {

TEST_CASE("Ackermann values agree with the integer oracle")
{
    const System ack = support::example("ack");
    for (std::uint64_t x = 0; x <= 3; ++x) {
        for (std::uint64_t y = 0; y <= 3; ++y) {
            auto out = evaluate(ack, call("ack", {to_unary(x), to_unary(y)}));
            REQUIRE(out.results.size() == 1);
            CHECK(from_unary(out.results[0][0]) == ackermann(x, y));
        }
    }
    auto nine = evaluate(ack, call("ack", {to_unary(2), to_unary(3)}));
    CHECK(rendered(nine) == std::vector<std::string>{"<" + to_unary(9).to_string() + ">"});
}

TEST_CASE("counters on the smallest benchmark cell")
{
    auto base = evaluate(support::example("ack_2"), call("ack_2", {to_unary(1), to_unary(2)}));
    CHECK(base.stats.rewrite_steps == 5);
    CHECK(base.stats.function_calls == 9);
    CHECK(rendered(base) == std::vector<std::string>{"<0>"});

    auto inv = evaluate(parse_or_throw(support::kAckPartial1), call("ack{1}{1}", {to_unary(1), to_unary(2)}));
    CHECK(rendered(inv) == std::vector<std::string>{"<0>"});
    CHECK(inv.stats.rewrite_steps == 4);
    CHECK(inv.stats.function_calls == 9);
}

TEST_CASE("first row of the benchmark table")
{
    const System base = support::example("ack_2");
    const System ack = support::example("ack");
    const System inv = invert_system(ack, make_task(ack, "ack", {1}, {1}, "partial")).produced;
    // (z, steps, calls) for ack_2 and ack{1}{1} with x = 1
    const std::uint64_t expected[][5] = {{2, 5, 9, 4, 9},     {3, 8, 12, 6, 12},   {4, 11, 15, 8, 15},
                                         {5, 14, 18, 10, 18}, {6, 17, 21, 12, 21}, {7, 20, 24, 14, 24},
                                         {8, 23, 27, 16, 27}};
    for (const auto& row : expected) {
        CAPTURE(row[0]);
        auto b = evaluate(base, call("ack_2", {to_unary(1), to_unary(row[0])}));
        auto c = evaluate(inv, call("ack{1}{1}", {to_unary(1), to_unary(row[0])}));
        CHECK(b.stats.rewrite_steps == row[1]);
        CHECK(b.stats.function_calls == row[2]);
        CHECK(c.stats.rewrite_steps == row[3]);
        CHECK(c.stats.function_calls == row[4]);
        CHECK(rendered(b) == rendered(c));
    }
}

TEST_CASE("random insertion enumerates every position")
{
    auto out = evaluate(parse_or_throw(support::kRemFull), call("rem{}{1,2}", {T("a"), support::list_of({"b", "b"})}));
    std::vector<std::string> got = rendered(out);
    std::sort(got.begin(), got.end());
    std::vector<std::string> want{"<:(a,:(b,:(b,nil))),0>", "<:(b,:(a,:(b,nil))),s(0)>", "<:(b,:(b,:(a,nil))),s(s(0))>"};
    CHECK(got == want);
}

TEST_CASE("budget exhaustion on a nonterminating inverse")
{
    const System full = parse_or_throw(support::kAckFull);
    auto out = evaluate(full, call("ack{}{1}", {to_unary(1)}), {EvalMode::all, 10000});
    CHECK(out.stats.exhausted);
    CHECK(out.stats.function_calls == 10000);
    REQUIRE(out.stats.budget);
    CHECK(*out.stats.budget == 10000);

    auto zero = evaluate(support::example("add"), call("add", {to_unary(0), to_unary(0)}), {EvalMode::all, 0});
    CHECK(zero.stats.exhausted);
    CHECK(zero.stats.function_calls == 0);
    CHECK(zero.results.empty());

    auto enough = evaluate(support::example("add"), call("add", {to_unary(2), to_unary(0)}), {EvalMode::all, 3});
    CHECK_FALSE(enough.stats.exhausted);
    CHECK(enough.stats.function_calls == 3);
}

TEST_CASE("first mode returns a member of the full enumeration")
{
    const System rem = parse_or_throw(support::kRemFull);
    const Query q = call("rem{}{1,2}", {T("b"), support::list_of({"a", "b", "a"})});
    auto all = evaluate(rem, q);
    auto first = evaluate(rem, q, {EvalMode::first, std::nullopt});
    REQUIRE(first.results.size() == 1);
    CHECK(std::find(all.results.begin(), all.results.end(), first.results[0]) != all.results.end());
    CHECK(first.stats.function_calls <= all.stats.function_calls);

    // first mode succeeds where all mode diverges
    const System full = parse_or_throw(support::kAckFull);
    auto f = evaluate(full, call("ack{}{1}", {to_unary(3)}), {EvalMode::first, 100000});
    REQUIRE(f.results.size() == 1);
    CHECK(f.results[0] == std::vector<Term>{to_unary(0), to_unary(2)});
}

TEST_CASE("addition oracle")
{
    const System add = support::example("add");
    for (std::uint64_t m = 0; m <= 8; ++m)
        for (std::uint64_t n = 0; n <= 8; ++n) {
            auto out = evaluate(add, call("add", {to_unary(m), to_unary(n)}));
            REQUIRE(out.results.size() == 1);
            CHECK(from_unary(out.results[0][0]) == m + n);
        }
}

TEST_CASE("duplicate results are kept")
{
    const System sys = parse_or_throw("(VAR x) (RULES f(x) -> <x>\n f(x) -> <x>)");
    auto out = evaluate(sys, call("f", {T("0")}));
    CHECK(out.results.size() == 2);
}

TEST_CASE("errors")
{
    const System empty = parse_or_throw("(VAR) (RULES)");
    CHECK_THROWS_AS(evaluate(empty, call("f", {})), UnknownSymbol);
    const System add = support::example("add");
    CHECK_THROWS_AS(evaluate(add, call("add", {T("0")})), ArityError);
    CHECK_THROWS_AS(evaluate(add, call("add", {Term::var("x"), T("0")})), EvalError);
    CHECK_THROWS_AS(evaluate(add, call("add", {Term::app("add", {T("0"), T("0")}), T("0")})), EvalError);
    const System loose = parse_or_throw("(VAR x y) (RULES f(x) -> <y>)");
    CHECK_THROWS_AS(evaluate(loose, call("f", {T("0")})), InstantiationFault);
}

TEST_CASE("unary helpers")
{
    CHECK(to_unary(0) == T("0"));
    CHECK(to_unary(3) == T("s(s(s(0)))"));
    CHECK(from_unary(T("s(s(0))")) == 2u);
    CHECK_FALSE(from_unary(T("s(a)")).has_value());
    CHECK(from_unary(to_unary(100000)) == 100000u);
}

TEST_CASE("trace mirrors the search")
{
    const System base = support::example("ack_2");
    Trace t = trace(base, call("ack_2", {to_unary(1), to_unary(2)}));
    CHECK(t.goal_count() == 9);
    CHECK(t.outcome.stats.function_calls == 9);
    REQUIRE(t.root);
    CHECK(t.root->goal == "ack_2(s(0),s(s(0)))");
    CHECK(t.root->calls_at_entry == 0);
    CHECK(t.root->results == 1);

    auto j = nlohmann::json::parse(t.to_json(2));
    CHECK(j["goal"] == "ack_2(s(0),s(s(0)))");
    CHECK(j["attempts"].size() == 3);
    CHECK(j["attempts"][0]["matched"] == false);

    Trace none = trace(base, call("ack_2", {to_unary(0), to_unary(0)}));
    CHECK(none.goal_count() == 1);
    CHECK(none.root->results == 0);
    for (const auto& a : none.root->attempts)
        for (const auto& c : a.conditions)
            CHECK(c.empty());
}

TEST_CASE("trace node count equals function calls")
{
    const System ack = support::example("ack");
    const System inv = invert_system(ack, make_task(ack, "ack", {2}, {1}, "partial")).produced;
    for (std::uint64_t z = 1; z < 12; ++z) {
        Trace t = trace(inv, call("ack{2}{1}", {to_unary(1), to_unary(z)}), 5000);
        CHECK(t.goal_count() == t.outcome.stats.function_calls);
        auto plain = evaluate(inv, call("ack{2}{1}", {to_unary(1), to_unary(z)}), {EvalMode::all, 5000});
        CHECK(plain.stats.function_calls == t.outcome.stats.function_calls);
        CHECK(plain.stats.rewrite_steps == t.outcome.stats.rewrite_steps);
        CHECK(plain.results == t.outcome.results);
    }
}

TEST_CASE("counters are deterministic")
{
    const System base = support::example("ack_2");
    auto a = evaluate(base, call("ack_2", {to_unary(2), to_unary(9)}));
    auto b = evaluate(base, call("ack_2", {to_unary(2), to_unary(9)}));
    CHECK(a.stats.function_calls == b.stats.function_calls);
    CHECK(a.stats.rewrite_steps == b.stats.rewrite_steps);
    CHECK(a.results == b.results);
}

TEST_CASE("deep chains do not exhaust the native stack")
{
    const System add = support::example("add");
    auto out = evaluate(add, call("add", {to_unary(20000), to_unary(1)}));
    REQUIRE(out.results.size() == 1);
    CHECK(from_unary(out.results[0][0]) == 20001u);

    Trace t = trace(parse_or_throw(support::kAckFull), call("ack{}{1}", {to_unary(2)}), 200000);
    CHECK(t.outcome.stats.exhausted);
    CHECK(t.goal_count() == 200000);
    CHECK_FALSE(t.to_json().empty());
}

TEST_CASE("results are sound against a brute-force derivation enumerator")
{
    auto check_sound = [](const System& s, const Query& q, std::uint64_t budget) {
        EvalOutcome out;
        try {
            out = evaluate(s, q, {EvalMode::all, budget});
        } catch (const InstantiationFault&) {
            return false;
        }
        BruteForce bf(s);
        std::set<std::vector<Term>> reachable;
        try {
            reachable = bf.solve(q.fn, q.args, 30);
        } catch (const InstantiationFault&) {
            return false;
        }
        for (const auto& r : out.results)
            CHECK_MESSAGE(reachable.contains(r), q.fn, tuple_to_string(q.args), " -> ", tuple_to_string(r));
        if (!out.stats.exhausted)
            CHECK(std::set<std::vector<Term>>(out.results.begin(), out.results.end()).size() <= reachable.size());
        return true;
    };

    check_sound(parse_or_throw(support::kRemFull), call("rem{}{1,2}", {T("a"), support::list_of({"a", "b"})}), 10000);
    check_sound(support::example("ack"), call("ack", {to_unary(2), to_unary(1)}), 10000);
    check_sound(parse_or_throw(support::kAckFull), call("ack{}{1}", {to_unary(3)}), 2000);

    std::mt19937 rng(8);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        System s = support::random_system(rng);
        const Symbol& f0 = *s.find("f0");
        std::vector<Term> args;
        for (std::size_t k = 0; k < f0.arity_in; ++k)
            args.push_back(support::random_term(rng, 2, false));
        if (check_sound(s, call("f0", args), 300))
            ++checked;
    }
    CHECK(checked > 50);
}

}
