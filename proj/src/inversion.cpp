#include "ccsinv/inversion.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace ccsinv {

namespace {

std::vector<std::size_t> all_indices(std::size_t n)
{
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{1});
    return v;
}

bool contains(const std::vector<std::size_t>& set, std::size_t i)
{
    return std::binary_search(set.begin(), set.end(), i);
}

std::string index_set_text(const std::vector<std::size_t>& v)
{
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += ',';
        s += std::to_string(v[i]);
    }
    return s + "}";
}

}  // namespace

bool Demand::is_trivial() const { return ioset.in.size() == arity_in && ioset.out.empty(); }
bool Demand::is_full() const { return ioset.in.empty() && ioset.out.size() == arity_out; }
bool Demand::is_partial() const { return ioset.out.size() == arity_out; }

bool Demand::valid() const
{
    auto ok = [](const std::vector<std::size_t>& v, std::size_t n) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] == 0 || v[i] > n || (i > 0 && v[i] <= v[i - 1]))
                return false;
        return true;
    };
    return ok(ioset.in, arity_in) && ok(ioset.out, arity_out);
}

std::string Demand::to_string() const
{
    return symbol + " I=" + index_set_text(ioset.in) + " O=" + index_set_text(ioset.out);
}

Demand make_demand(const std::string& symbol, std::size_t arity_in, std::size_t arity_out,
                   std::vector<std::size_t> in, std::vector<std::size_t> out)
{
    std::sort(in.begin(), in.end());
    std::sort(out.begin(), out.end());
    Demand d{symbol, arity_in, arity_out, {std::move(in), std::move(out)}};
    if (!d.valid())
        throw InversionError("io-set " + index_set_text(d.ioset.in) + index_set_text(d.ioset.out) +
                             " out of range for '" + symbol + "' (" + std::to_string(arity_in) + " inputs, " +
                             std::to_string(arity_out) + " outputs)");
    return d;
}

std::string inverse_name(const Demand& d)
{
    if (d.is_trivial())
        return d.symbol;
    return d.symbol + index_set_text(d.ioset.in) + index_set_text(d.ioset.out);
}

namespace {

struct Split {
    std::vector<Term> inputs;
    std::vector<Term> outputs;
};

// [xs_i : i in I] ++ [ys_j : j in O]  and the complement, both ascending.
Split split_by(std::span<const Term> xs, std::span<const Term> ys, const IOSet& io)
{
    Split s;
    for (std::size_t i = 1; i <= xs.size(); ++i)
        (contains(io.in, i) ? s.inputs : s.outputs).push_back(xs[i - 1]);
    std::vector<Term> out_tail;
    for (std::size_t j = 1; j <= ys.size(); ++j)
        (contains(io.out, j) ? s.inputs : out_tail).push_back(ys[j - 1]);
    s.outputs.insert(s.outputs.end(), out_tail.begin(), out_tail.end());
    return s;
}

Rule invert_head(const Rule& rule, const Demand& d)
{
    Split s = split_by(rule.params, rule.results, d.ioset);
    return Rule{inverse_name(d), std::move(s.inputs), std::move(s.outputs), {}};
}

Demand condition_demand(const Condition& c, std::vector<std::size_t> in, std::vector<std::size_t> out)
{
    return Demand{c.fn, c.args.size(), c.results.size(), {std::move(in), std::move(out)}};
}

bool known_term(const Term& t, const std::set<std::string>& known)
{
    std::set<std::string> vs;
    t.collect_vars(vs);
    return std::includes(known.begin(), known.end(), vs.begin(), vs.end());
}

void add_vars(std::set<std::string>& known, std::span<const Term> ts)
{
    for (const auto& t : ts)
        t.collect_vars(known);
}

void check_extra_vars(InvertedRule& out, const std::set<std::string>& known)
{
    if (!std::all_of(out.rule.results.begin(), out.rule.results.end(),
                     [&](const Term& t) { return known_term(t, known); }))
        out.warnings.push_back("extra variables in inverted rule: " + out.rule.to_string());
}

// Variables that are available after the inverted rule's conditions have run
// left to right, ignoring whether condition inputs were themselves available.
std::set<std::string> flow_closure(const Rule& r)
{
    std::set<std::string> known = vars_of(r.params);
    for (const auto& c : r.conditions)
        add_vars(known, c.results);
    return known;
}

class TrivialInverter final : public RuleInverter {
public:
    std::string name() const override { return "trivial"; }
    bool admits(const Demand& d) const override { return d.is_trivial(); }

    InvertedRule invert(const Rule& rule, const Demand&) const override
    {
        InvertedRule out{rule, {}, {}};
        for (const auto& c : rule.conditions)
            out.demands.push_back(condition_demand(c, all_indices(c.args.size()), {}));
        check_extra_vars(out, flow_closure(out.rule));
        return out;
    }
};

class FullInverter final : public RuleInverter {
public:
    std::string name() const override { return "full"; }
    bool admits(const Demand& d) const override { return d.is_full(); }

    InvertedRule invert(const Rule& rule, const Demand& d) const override
    {
        InvertedRule out{invert_head(rule, d), {}, {}};
        for (auto it = rule.conditions.rbegin(); it != rule.conditions.rend(); ++it) {
            Demand cd = condition_demand(*it, {}, all_indices(it->results.size()));
            out.rule.conditions.push_back({inverse_name(cd), it->results, it->args});
            out.demands.push_back(std::move(cd));
        }
        check_extra_vars(out, flow_closure(out.rule));
        return out;
    }
};

// Shared dataflow scheduler for the partial and semi inverters. Conditions
// are placed one at a time; every argument or result whose variables are
// already known becomes an input of the inverted condition.
class SchedulingInverter : public RuleInverter {
public:
    InvertedRule invert(const Rule& rule, const Demand& d) const override
    {
        InvertedRule out{invert_head(rule, d), {}, {}};
        std::set<std::string> known = vars_of(out.rule.params);
        std::vector<bool> done(rule.conditions.size(), false);

        for (std::size_t step = 0; step < rule.conditions.size(); ++step) {
            const std::size_t pick = select(rule.conditions, done, known);
            const Condition& c = rule.conditions[pick];
            done[pick] = true;

            std::vector<std::size_t> in, outs;
            for (std::size_t i = 1; i <= c.args.size(); ++i)
                if (known_term(c.args[i - 1], known))
                    in.push_back(i);
            if (forces_all_outputs()) {
                outs = all_indices(c.results.size());
            } else {
                for (std::size_t j = 1; j <= c.results.size(); ++j)
                    if (known_term(c.results[j - 1], known))
                        outs.push_back(j);
            }
            Demand cd = condition_demand(c, std::move(in), std::move(outs));
            Split s = split_by(c.args, c.results, cd.ioset);
            add_vars(known, s.outputs);
            out.rule.conditions.push_back({inverse_name(cd), std::move(s.inputs), std::move(s.outputs)});
            out.demands.push_back(std::move(cd));
        }
        check_extra_vars(out, known);
        return out;
    }

protected:
    virtual bool forces_all_outputs() const = 0;
    virtual std::size_t select(const std::vector<Condition>& conds, const std::vector<bool>& done,
                               const std::set<std::string>& known) const = 0;
};

class PartialInverter final : public SchedulingInverter {
public:
    std::string name() const override { return "partial"; }
    bool admits(const Demand& d) const override { return d.is_partial(); }

protected:
    bool forces_all_outputs() const override { return true; }

    // Rightmost condition whose results are all known.
    std::size_t select(const std::vector<Condition>& conds, const std::vector<bool>& done,
                       const std::set<std::string>& known) const override
    {
        for (std::size_t k = conds.size(); k-- > 0;) {
            if (done[k])
                continue;
            const auto& rs = conds[k].results;
            if (std::all_of(rs.begin(), rs.end(), [&](const Term& t) { return known_term(t, known); }))
                return k;
        }
        std::string pending;
        for (std::size_t k = 0; k < conds.size(); ++k) {
            if (done[k])
                continue;
            const auto& c = conds[k];
            pending = "condition " + std::to_string(k + 1) + " (" + c.fn + " -> " + tuple_to_string(c.results) + ")";
            break;
        }
        throw InversionError("partial inversion deadlock: no condition has all its results known; first pending is " +
                             pending);
    }
};

class SemiInverter final : public SchedulingInverter {
public:
    std::string name() const override { return "semi"; }
    bool admits(const Demand& d) const override { return d.valid(); }

protected:
    bool forces_all_outputs() const override { return false; }

    // Most known argument and result positions; leftmost on ties.
    std::size_t select(const std::vector<Condition>& conds, const std::vector<bool>& done,
                       const std::set<std::string>& known) const override
    {
        std::size_t best = conds.size();
        std::size_t best_score = 0;
        for (std::size_t k = 0; k < conds.size(); ++k) {
            if (done[k])
                continue;
            std::size_t score = 0;
            for (const auto& t : conds[k].args)
                score += known_term(t, known);
            for (const auto& t : conds[k].results)
                score += known_term(t, known);
            if (best == conds.size() || score > best_score) {
                best = k;
                best_score = score;
            }
        }
        return best;
    }
};

std::vector<Term> sorted_terms(std::vector<Term> ts)
{
    std::sort(ts.begin(), ts.end());
    return ts;
}

std::vector<Term> concat(std::span<const Term> a, std::span<const Term> b)
{
    std::vector<Term> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

void check_contract(const Rule& src, const Demand& d, const InvertedRule& inv, std::string_view inverter)
{
    auto violation = [&](const std::string& what) {
        throw ContractViolation("inverter '" + std::string(inverter) + "' violated its contract on " + d.to_string() +
                                ": " + what);
    };
    if (inv.rule.fn != inverse_name(d))
        violation("head symbol '" + inv.rule.fn + "' differs from '" + inverse_name(d) + "'");
    if (inv.rule.params.size() != d.ioset.in.size() + d.ioset.out.size())
        violation("inverted rule takes " + std::to_string(inv.rule.params.size()) + " inputs");
    if (sorted_terms(concat(inv.rule.params, inv.rule.results)) != sorted_terms(concat(src.params, src.results)))
        violation("head terms are not a permutation of the source head terms");
    if (inv.rule.conditions.size() != src.conditions.size())
        violation("condition count changed");
    if (inv.demands.size() != inv.rule.conditions.size())
        violation("expected one demand per condition");

    std::vector<std::vector<Term>> before, after;
    for (const auto& c : src.conditions)
        before.push_back(sorted_terms(concat(c.args, c.results)));
    for (std::size_t k = 0; k < inv.rule.conditions.size(); ++k) {
        const auto& c = inv.rule.conditions[k];
        after.push_back(sorted_terms(concat(c.args, c.results)));
        const Demand& cd = inv.demands[k];
        if (!cd.valid() || inverse_name(cd) != c.fn)
            violation("condition '" + c.fn + "' does not match its demand " + cd.to_string());
    }
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    if (before != after)
        violation("condition terms are not preserved");
}

}  // namespace

std::unique_ptr<RuleInverter> make_trivial_inverter() { return std::make_unique<TrivialInverter>(); }
std::unique_ptr<RuleInverter> make_full_inverter() { return std::make_unique<FullInverter>(); }
std::unique_ptr<RuleInverter> make_partial_inverter() { return std::make_unique<PartialInverter>(); }
std::unique_ptr<RuleInverter> make_semi_inverter() { return std::make_unique<SemiInverter>(); }

InverterRegistry InverterRegistry::with_builtins()
{
    InverterRegistry r;
    r.register_inverter("trivial", make_trivial_inverter());
    r.register_inverter("full", make_full_inverter());
    r.register_inverter("partial", make_partial_inverter());
    r.register_inverter("semi", make_semi_inverter());
    return r;
}

const InverterRegistry& InverterRegistry::builtins()
{
    static const InverterRegistry registry = with_builtins();
    return registry;
}

void InverterRegistry::register_inverter(std::string name, std::shared_ptr<const RuleInverter> inverter)
{
    if (!inverter)
        throw std::invalid_argument("null inverter '" + name + "'");
    if (inverters_.contains(name))
        throw DuplicateInverter("inverter '" + name + "' is already registered");
    inverters_.emplace(std::move(name), std::move(inverter));
}

const RuleInverter* InverterRegistry::find(std::string_view name) const
{
    auto it = inverters_.find(name);
    return it == inverters_.end() ? nullptr : it->second.get();
}

const RuleInverter& InverterRegistry::get(std::string_view name) const
{
    if (const auto* inv = find(name))
        return *inv;
    throw InversionError("unknown inverter '" + std::string(name) + "'");
}

std::vector<std::string> InverterRegistry::names() const
{
    std::vector<std::string> out;
    for (const auto& [name, _] : inverters_)
        out.push_back(name);
    return out;
}

InvertedRule invert_rule(const Rule& rule, const Demand& demand, std::string_view inverter,
                         const InverterRegistry& registry)
{
    if (rule.fn != demand.symbol)
        throw InversionError("rule for '" + rule.fn + "' cannot serve demand " + demand.to_string());
    if (rule.params.size() != demand.arity_in || rule.results.size() != demand.arity_out)
        throw ArityError("rule arity does not match demand " + demand.to_string());
    const RuleInverter& inv = registry.get(inverter);
    if (!demand.valid() || !inv.admits(demand))
        throw InversionError("inverter '" + std::string(inverter) + "' does not admit " + demand.to_string());
    InvertedRule out = inv.invert(rule, demand);
    check_contract(rule, demand, out, inverter);
    return out;
}

namespace {

std::string inverter_for(const Demand& d, const InversionTask& task)
{
    if (d == task.root)
        return task.inverter;
    if (task.inverter == "full" && d.is_full())
        return "full";
    if (d.is_trivial())
        return "trivial";
    if (d.is_partial())
        return "partial";
    return "semi";
}

class Driver {
public:
    Driver(const System& sys, const InversionTask& task, const InverterRegistry& reg)
        : sys_(sys), task_(task), reg_(reg)
    {
    }

    InversionReport run()
    {
        visit(task_.root);
        InversionReport report;
        std::vector<Rule> rules;
        for (auto& [demand, inverted] : resolved_) {
            report.demands_resolved.push_back(demand);
            for (auto& ir : inverted) {
                rules.push_back(std::move(ir.rule));
                report.warnings.insert(report.warnings.end(), ir.warnings.begin(), ir.warnings.end());
            }
        }
        report.produced = make_system(std::move(rules));
        return report;
    }

private:
    void visit(const Demand& d)
    {
        seen_.insert(d);
        chain_.push_back(d);
        const std::string inverter = inverter_for(d, task_);
        std::vector<InvertedRule> inverted;
        for (const Rule* r : sys_.rules_of(d.symbol)) {
            try {
                inverted.push_back(invert_rule(*r, d, inverter, reg_));
            } catch (const InversionError& e) {
                std::string path;
                for (const auto& c : chain_)
                    path += (path.empty() ? "" : " -> ") + inverse_name(c);
                std::string msg = std::string(e.what()) + " [rule " + r->to_string() + "; demand chain " + path + "]";
                if (dynamic_cast<const ContractViolation*>(&e))
                    throw ContractViolation(msg);
                throw InversionError(msg);
            }
        }
        std::vector<Demand> emitted;
        for (const auto& ir : inverted)
            emitted.insert(emitted.end(), ir.demands.begin(), ir.demands.end());
        resolved_.emplace_back(d, std::move(inverted));
        for (const auto& e : emitted)
            if (!seen_.contains(e))
                visit(e);
        chain_.pop_back();
    }

    const System& sys_;
    const InversionTask& task_;
    const InverterRegistry& reg_;
    std::set<Demand> seen_;
    std::vector<Demand> chain_;
    std::vector<std::pair<Demand, std::vector<InvertedRule>>> resolved_;
};

}  // namespace

InversionReport invert_system(const System& system, const InversionTask& task, const InverterRegistry& registry)
{
    const RuleInverter& root = registry.get(task.inverter);
    if (!task.root.valid() || !root.admits(task.root))
        throw InversionError("inverter '" + task.inverter + "' does not admit " + task.root.to_string());
    return Driver(system, task, registry).run();
}

InversionTask make_task(const System& system, const std::string& fn, std::vector<std::size_t> in,
                        std::vector<std::size_t> out, std::string inverter, const InverterRegistry& registry)
{
    const Symbol* sym = system.find(fn);
    if (!sym || sym->kind != SymbolKind::defined)
        throw InversionError("'" + fn + "' is not a defined symbol of the system");
    Demand d = make_demand(fn, sym->arity_in, sym->arity_out, std::move(in), std::move(out));
    const RuleInverter& inv = registry.get(inverter);
    if (!inv.admits(d))
        throw InversionError("inverter '" + inverter + "' does not admit " + d.to_string());
    return InversionTask{std::move(d), std::move(inverter)};
}

}  // namespace ccsinv
