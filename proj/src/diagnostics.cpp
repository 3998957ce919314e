#include "ccsinv/diagnostics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "ccsinv/inversion.hpp"

namespace ccsinv {

const std::vector<std::string>& property_names()
{
    static const std::vector<std::string> names{
        "left-linear",              "right-linear", "non-erasing", "non-overlapping",
        "deterministic-conditions", "EV-free",      "functional",  "reversible",
    };
    return names;
}

const PropertyResult& PropertyReport::get(const std::string& name) const
{
    for (const auto& p : properties)
        if (p.name == name)
            return p;
    throw std::out_of_range("unknown property '" + name + "'");
}

std::string PropertyReport::to_text() const
{
    std::size_t width = 0;
    for (const auto& p : properties)
        width = std::max(width, p.name.size());
    std::string s;
    for (const auto& p : properties) {
        s += p.name + std::string(width - p.name.size() + 2, ' ') + (p.holds ? "yes" : "no") + "\n";
        for (const auto& w : p.witnesses) {
            if (w.symbol.empty()) {
                s += "    " + w.detail + "\n";
                continue;
            }
            s += "    " + w.symbol;
            if (!w.rules.empty()) {
                s += w.rules.size() == 1 ? " rule " : " rules ";
                for (std::size_t i = 0; i < w.rules.size(); ++i)
                    s += (i ? " and " : "") + std::to_string(w.rules[i]);
            }
            s += ": " + w.detail + "\n";
        }
    }
    return s;
}

namespace {

struct RuleRef {
    const Rule* rule;
    std::size_t ordinal;  // 1-based within its symbol
};

std::vector<RuleRef> in_order(const System& sys)
{
    std::vector<RuleRef> out;
    std::map<std::string, std::size_t> counts;
    for (const auto& r : sys.rules)
        out.push_back({&r, ++counts[r.fn]});
    return out;
}

std::map<std::string, std::size_t> occurrences(std::span<const Term> ts)
{
    std::map<std::string, std::size_t> n;
    std::vector<const Term*> stack;
    for (const auto& t : ts)
        stack.push_back(&t);
    while (!stack.empty()) {
        const Term* t = stack.back();
        stack.pop_back();
        if (t->is_var()) {
            ++n[t->name()];
            continue;
        }
        for (const auto& a : t->args())
            stack.push_back(&a);
    }
    return n;
}

PropertyResult linearity(const System& sys, const std::string& name, bool params)
{
    PropertyResult p{name, true, {}};
    for (const auto& [rule, ord] : in_order(sys)) {
        for (const auto& [v, n] : occurrences(params ? rule->params : rule->results)) {
            if (n > 1)
                p.witnesses.push_back({rule->fn, {ord}, "variable " + v + " occurs " + std::to_string(n) + " times in the " +
                                                           (params ? "parameters" : "results")});
        }
    }
    p.holds = p.witnesses.empty();
    return p;
}

PropertyResult non_erasing(const System& sys)
{
    PropertyResult p{"non-erasing", true, {}};
    for (const auto& [rule, ord] : in_order(sys)) {
        std::set<std::string> used = vars_of(rule->results);
        for (const auto& c : rule->conditions) {
            for (const auto& t : c.args)
                t.collect_vars(used);
            for (const auto& t : c.results)
                t.collect_vars(used);
        }
        for (const auto& v : vars_of(rule->params))
            if (!used.contains(v))
                p.witnesses.push_back({rule->fn, {ord}, "parameter variable " + v + " is erased"});
    }
    p.holds = p.witnesses.empty();
    return p;
}

PropertyResult non_overlapping(const System& sys)
{
    PropertyResult p{"non-overlapping", true, {}};
    for (const auto& fn : sys.defined_in_order()) {
        const auto rules = sys.rules_of(fn);
        for (std::size_t i = 0; i < rules.size(); ++i) {
            for (std::size_t j = i + 1; j < rules.size(); ++j) {
                Rule other = rename_apart(*rules[j], rules[i]->vars());
                if (auto mgu = unify_tuple(other.params, rules[i]->params)) {
                    Rule inst{fn, mgu->apply(rules[i]->params), {}, {}};
                    std::string call = inst.to_string();
                    call = call.substr(0, call.find(" -> "));
                    p.witnesses.push_back({fn, {i + 1, j + 1}, "left-hand sides unify at " + call});
                }
            }
        }
    }
    p.holds = p.witnesses.empty();
    return p;
}

PropertyResult deterministic_conditions(const System& sys)
{
    PropertyResult p{"deterministic-conditions", true, {}};
    for (const auto& [rule, ord] : in_order(sys)) {
        std::set<std::string> bound = vars_of(rule->params);
        for (std::size_t k = 0; k < rule->conditions.size(); ++k) {
            const auto& c = rule->conditions[k];
            for (const auto& v : vars_of(c.args))
                if (!bound.contains(v))
                    p.witnesses.push_back({rule->fn, {ord},
                                           "condition " + std::to_string(k + 1) + " uses unbound variable " + v});
            for (const auto& t : c.results)
                t.collect_vars(bound);
        }
        for (const auto& v : vars_of(rule->results))
            if (!bound.contains(v))
                p.witnesses.push_back({rule->fn, {ord}, "result uses unbound variable " + v});
    }
    p.holds = p.witnesses.empty();
    return p;
}

PropertyResult ev_free(const System& sys)
{
    PropertyResult p{"EV-free", true, {}};
    for (const auto& [rule, ord] : in_order(sys)) {
        const auto head = vars_of(rule->params);
        for (const auto& v : rule->vars())
            if (!head.contains(v))
                p.witnesses.push_back({rule->fn, {ord}, "extra variable " + v});
    }
    p.holds = p.witnesses.empty();
    return p;
}

PropertyResult conjunction(const std::string& name, std::initializer_list<const PropertyResult*> parts)
{
    PropertyResult p{name, true, {}};
    for (const auto* part : parts) {
        if (part->holds)
            continue;
        p.holds = false;
        for (auto w : part->witnesses) {
            w.detail = part->name + ": " + w.detail;
            p.witnesses.push_back(std::move(w));
        }
    }
    return p;
}

struct Core {
    PropertyResult non_overlapping, deterministic, functional;
};

Core functional_core(const System& sys)
{
    Core c{non_overlapping(sys), deterministic_conditions(sys), {}};
    c.functional = conjunction("functional", {&c.non_overlapping, &c.deterministic});
    return c;
}

}  // namespace

System full_inverse(const System& system)
{
    std::vector<Rule> rules;
    std::set<std::string> done;
    for (const auto& fn : system.defined_in_order()) {
        const Symbol* sym = system.find(fn);
        auto task = make_task(system, fn, {}, [&] {
            std::vector<std::size_t> all(sym->arity_out);
            for (std::size_t i = 0; i < all.size(); ++i)
                all[i] = i + 1;
            return all;
        }(), "full");
        auto report = invert_system(system, task);
        for (const auto& d : report.demands_resolved) {
            const std::string name = inverse_name(d);
            if (!done.insert(name).second)
                continue;
            for (const auto& r : report.produced.rules)
                if (r.fn == name)
                    rules.push_back(r);
        }
    }
    return make_system(std::move(rules));
}

PropertyReport analyze(const System& system)
{
    PropertyReport report;
    auto core = functional_core(system);

    PropertyResult reversible{"reversible", true, {}};
    if (!core.functional.holds) {
        reversible.holds = false;
        reversible.witnesses.push_back({"", {}, "the system is not functional"});
    } else {
        try {
            auto inv_core = functional_core(full_inverse(system));
            if (!inv_core.functional.holds) {
                reversible.holds = false;
                for (auto w : inv_core.functional.witnesses) {
                    w.detail = "full inverse " + w.detail;
                    reversible.witnesses.push_back(std::move(w));
                }
            }
        } catch (const std::exception& e) {
            reversible.holds = false;
            reversible.witnesses.push_back({"", {}, std::string("full inversion failed: ") + e.what()});
        }
    }

    report.properties.push_back(linearity(system, "left-linear", true));
    report.properties.push_back(linearity(system, "right-linear", false));
    report.properties.push_back(non_erasing(system));
    report.properties.push_back(std::move(core.non_overlapping));
    report.properties.push_back(std::move(core.deterministic));
    report.properties.push_back(ev_free(system));
    report.properties.push_back(std::move(core.functional));
    report.properties.push_back(std::move(reversible));
    return report;
}

bool ComparisonTable::at(const std::string& row, const std::string& column) const
{
    auto r = std::find(rows.begin(), rows.end(), row);
    auto c = std::find(columns.begin(), columns.end(), column);
    if (r == rows.end() || c == columns.end())
        throw std::out_of_range("no cell " + row + "/" + column);
    return cells[static_cast<std::size_t>(r - rows.begin())][static_cast<std::size_t>(c - columns.begin())];
}

std::string ComparisonTable::render() const
{
    std::size_t first = 0;
    for (const auto& r : rows)
        first = std::max(first, r.size());
    std::vector<std::size_t> widths;
    for (const auto& c : columns)
        widths.push_back(std::max<std::size_t>(c.size(), 3));

    auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
    std::string s = pad("", first);
    for (std::size_t c = 0; c < columns.size(); ++c)
        s += "  " + pad(columns[c], widths[c]);
    while (!s.empty() && s.back() == ' ')
        s.pop_back();
    s += "\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::string line = pad(rows[r], first);
        for (std::size_t c = 0; c < columns.size(); ++c)
            line += "  " + pad(cells[r][c] ? "yes" : "no", widths[c]);
        while (!line.empty() && line.back() == ' ')
            line.pop_back();
        s += line + "\n";
    }
    return s;
}

ComparisonTable compare(const std::vector<std::pair<std::string, System>>& systems)
{
    if (systems.empty())
        throw std::invalid_argument("compare needs at least one system");
    ComparisonTable t;
    t.rows = property_names();
    t.cells.assign(t.rows.size(), {});
    for (const auto& [label, sys] : systems) {
        t.columns.push_back(label);
        const auto report = analyze(sys);
        for (std::size_t r = 0; r < t.rows.size(); ++r)
            t.cells[r].push_back(report.holds(t.rows[r]));
    }
    return t;
}

}  // namespace ccsinv
