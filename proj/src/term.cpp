#include "ccsinv/term.hpp"

#include <algorithm>
#include <sstream>

namespace ccsinv {

Term Term::var(std::string name)
{
    return Term(std::make_shared<const Node>(Node{true, std::move(name), {}}));
}

Term Term::app(std::string ctor, std::vector<Term> args)
{
    return Term(std::make_shared<const Node>(Node{false, std::move(ctor), std::move(args)}));
}

bool Term::is_ground() const
{
    if (is_var())
        return false;
    return std::all_of(args().begin(), args().end(), [](const Term& t) { return t.is_ground(); });
}

void Term::collect_vars(std::set<std::string>& out) const
{
    if (is_var()) {
        out.insert(name());
        return;
    }
    for (const auto& a : args())
        a.collect_vars(out);
}

void Term::collect_vars_ordered(std::vector<std::string>& out) const
{
    if (is_var()) {
        if (std::find(out.begin(), out.end(), name()) == out.end())
            out.push_back(name());
        return;
    }
    for (const auto& a : args())
        a.collect_vars_ordered(out);
}

bool Term::occurs(const std::string& v) const
{
    if (is_var())
        return name() == v;
    return std::any_of(args().begin(), args().end(), [&](const Term& t) { return t.occurs(v); });
}

std::string Term::to_string() const
{
    if (is_var() || args().empty())
        return name();
    std::string s = name();
    s += '(';
    for (std::size_t i = 0; i < arity(); ++i) {
        if (i)
            s += ',';
        s += args()[i].to_string();
    }
    s += ')';
    return s;
}

bool operator==(const Term& a, const Term& b)
{
    if (a.node_ == b.node_)
        return true;
    if (a.is_var() != b.is_var() || a.name() != b.name() || a.arity() != b.arity())
        return false;
    return std::equal(a.args().begin(), a.args().end(), b.args().begin());
}

std::strong_ordering operator<=>(const Term& a, const Term& b)
{
    if (a.node_ == b.node_)
        return std::strong_ordering::equal;
    if (a.is_var() != b.is_var())
        return a.is_var() ? std::strong_ordering::less : std::strong_ordering::greater;
    if (auto c = a.name() <=> b.name(); c != 0)
        return c;
    return std::lexicographical_compare_three_way(a.args().begin(), a.args().end(),
                                                  b.args().begin(), b.args().end());
}

std::set<std::string> vars_of(std::span<const Term> terms)
{
    std::set<std::string> out;
    for (const auto& t : terms)
        t.collect_vars(out);
    return out;
}

std::string tuple_to_string(std::span<const Term> terms)
{
    std::string s = "<";
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i)
            s += ',';
        s += terms[i].to_string();
    }
    return s + ">";
}

// ---------------------------------------------------------------------------

const Term* Substitution::find(const std::string& var) const
{
    auto it = map_.find(var);
    return it == map_.end() ? nullptr : &it->second;
}

Term Substitution::apply(const Term& t) const
{
    if (t.is_var()) {
        const Term* b = find(t.name());
        return b ? *b : t;
    }
    if (t.args().empty())
        return t;
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const auto& a : t.args())
        args.push_back(apply(a));
    return Term::app(t.name(), std::move(args));
}

std::vector<Term> Substitution::apply(std::span<const Term> ts) const
{
    std::vector<Term> out;
    out.reserve(ts.size());
    for (const auto& t : ts)
        out.push_back(apply(t));
    return out;
}

Substitution Substitution::then(const Substitution& other) const
{
    Substitution out;
    for (const auto& [v, t] : map_)
        out.map_.insert_or_assign(v, other.apply(t));
    for (const auto& [v, t] : other.map_)
        if (!out.map_.contains(v))
            out.map_.emplace(v, t);
    return out;
}

// ---------------------------------------------------------------------------

std::set<std::string> Rule::vars() const
{
    std::set<std::string> out;
    for (const auto& t : params)
        t.collect_vars(out);
    for (const auto& t : results)
        t.collect_vars(out);
    for (const auto& c : conditions) {
        for (const auto& t : c.args)
            t.collect_vars(out);
        for (const auto& t : c.results)
            t.collect_vars(out);
    }
    return out;
}

std::vector<std::string> Rule::vars_ordered() const
{
    std::vector<std::string> out;
    for (const auto& t : params)
        t.collect_vars_ordered(out);
    for (const auto& t : results)
        t.collect_vars_ordered(out);
    for (const auto& c : conditions) {
        for (const auto& t : c.args)
            t.collect_vars_ordered(out);
        for (const auto& t : c.results)
            t.collect_vars_ordered(out);
    }
    return out;
}

namespace {

std::string call_to_string(const std::string& fn, std::span<const Term> args)
{
    std::string s = fn;
    if (!args.empty()) {
        s += '(';
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i)
                s += ',';
            s += args[i].to_string();
        }
        s += ')';
    }
    return s;
}

}  // namespace

std::string Rule::to_string() const
{
    std::string s = call_to_string(fn, params) + " -> " + tuple_to_string(results);
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        s += i == 0 ? " <= " : ", ";
        s += call_to_string(conditions[i].fn, conditions[i].args) + " -> " +
             tuple_to_string(conditions[i].results);
    }
    return s;
}

const Symbol* System::find(const std::string& name) const
{
    auto it = signature.find(name);
    return it == signature.end() ? nullptr : &it->second;
}

std::vector<const Rule*> System::rules_of(const std::string& fn) const
{
    std::vector<const Rule*> out;
    for (const auto& r : rules)
        if (r.fn == fn)
            out.push_back(&r);
    return out;
}

std::vector<std::string> System::defined_in_order() const
{
    std::vector<std::string> out;
    for (const auto& r : rules)
        if (std::find(out.begin(), out.end(), r.fn) == out.end())
            out.push_back(r.fn);
    return out;
}

namespace {

void declare(Signature& sig, const std::string& name, SymbolKind kind, std::size_t in, std::size_t out)
{
    auto [it, inserted] = sig.try_emplace(name, Symbol{name, kind, in, out});
    if (inserted)
        return;
    const Symbol& s = it->second;
    if (s.kind != kind)
        throw ArityError("symbol '" + name + "' used both as constructor and defined symbol");
    if (s.arity_in != in || s.arity_out != out)
        throw ArityError("symbol '" + name + "' used with inconsistent arity");
}

void declare_constructors(Signature& sig, const Term& t)
{
    if (t.is_var())
        return;
    declare(sig, t.name(), SymbolKind::constructor, t.arity(), 0);
    for (const auto& a : t.args())
        declare_constructors(sig, a);
}

}  // namespace

Signature infer_signature(std::span<const Rule> rules)
{
    Signature sig;
    for (const auto& r : rules) {
        declare(sig, r.fn, SymbolKind::defined, r.params.size(), r.results.size());
        for (const auto& c : r.conditions)
            declare(sig, c.fn, SymbolKind::defined, c.args.size(), c.results.size());
    }
    for (const auto& r : rules) {
        for (const auto& t : r.params)
            declare_constructors(sig, t);
        for (const auto& t : r.results)
            declare_constructors(sig, t);
        for (const auto& c : r.conditions) {
            for (const auto& t : c.args)
                declare_constructors(sig, t);
            for (const auto& t : c.results)
                declare_constructors(sig, t);
        }
    }
    return sig;
}

System make_system(std::vector<Rule> rules)
{
    System s;
    s.signature = infer_signature(rules);
    s.rules = std::move(rules);
    return s;
}

// ---------------------------------------------------------------------------

bool match_into(const Term& pattern, const Term& subject, Substitution& into)
{
    if (pattern.is_var()) {
        if (const Term* bound = into.find(pattern.name()))
            return *bound == subject;
        into.bind(pattern.name(), subject);
        return true;
    }
    if (subject.is_var() || pattern.name() != subject.name() || pattern.arity() != subject.arity())
        return false;
    for (std::size_t i = 0; i < pattern.arity(); ++i)
        if (!match_into(pattern.args()[i], subject.args()[i], into))
            return false;
    return true;
}

std::optional<Substitution> match(const Term& pattern, const Term& subject)
{
    Substitution s;
    if (!match_into(pattern, subject, s))
        return std::nullopt;
    return s;
}

std::optional<Substitution> match_tuple(std::span<const Term> patterns, std::span<const Term> subjects)
{
    if (patterns.size() != subjects.size())
        throw ArityError("match_tuple: " + std::to_string(patterns.size()) + " patterns vs " +
                         std::to_string(subjects.size()) + " subjects");
    Substitution s;
    for (std::size_t i = 0; i < patterns.size(); ++i)
        if (!match_into(patterns[i], subjects[i], s))
            return std::nullopt;
    return s;
}

namespace {

// Robinson unification over an explicit equation stack; the substitution is
// kept idempotent by applying each new binding to the existing ones.
bool unify_pairs(std::vector<std::pair<Term, Term>> eqs, Substitution& sigma)
{
    while (!eqs.empty()) {
        auto [a, b] = std::move(eqs.back());
        eqs.pop_back();
        a = sigma.apply(a);
        b = sigma.apply(b);
        if (a == b)
            continue;
        if (!a.is_var() && b.is_var())
            std::swap(a, b);
        if (a.is_var()) {
            if (b.occurs(a.name()))
                return false;
            Substitution single;
            single.bind(a.name(), b);
            sigma = sigma.then(single);
            continue;
        }
        if (a.name() != b.name() || a.arity() != b.arity())
            return false;
        for (std::size_t i = 0; i < a.arity(); ++i)
            eqs.emplace_back(a.args()[i], b.args()[i]);
    }
    return true;
}

}  // namespace

std::optional<Substitution> unify(const Term& a, const Term& b)
{
    Substitution s;
    if (!unify_pairs({{a, b}}, s))
        return std::nullopt;
    return s;
}

std::optional<Substitution> unify_tuple(std::span<const Term> as, std::span<const Term> bs)
{
    if (as.size() != bs.size())
        throw ArityError("unify_tuple: length mismatch");
    std::vector<std::pair<Term, Term>> eqs;
    for (std::size_t i = 0; i < as.size(); ++i)
        eqs.emplace_back(as[i], bs[i]);
    std::reverse(eqs.begin(), eqs.end());
    Substitution s;
    if (!unify_pairs(std::move(eqs), s))
        return std::nullopt;
    return s;
}

// ---------------------------------------------------------------------------

namespace {

Term rename_term(const Term& t, const std::map<std::string, std::string>& ren)
{
    if (t.is_var()) {
        auto it = ren.find(t.name());
        return it == ren.end() ? t : Term::var(it->second);
    }
    if (t.args().empty())
        return t;
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const auto& a : t.args())
        args.push_back(rename_term(a, ren));
    return Term::app(t.name(), std::move(args));
}

std::vector<Term> rename_terms(std::span<const Term> ts, const std::map<std::string, std::string>& ren)
{
    std::vector<Term> out;
    out.reserve(ts.size());
    for (const auto& t : ts)
        out.push_back(rename_term(t, ren));
    return out;
}

}  // namespace

Rule rename_vars(const Rule& rule, const std::map<std::string, std::string>& ren)
{
    Rule out;
    out.fn = rule.fn;
    out.params = rename_terms(rule.params, ren);
    out.results = rename_terms(rule.results, ren);
    for (const auto& c : rule.conditions)
        out.conditions.push_back({c.fn, rename_terms(c.args, ren), rename_terms(c.results, ren)});
    return out;
}

Rule rename_apart(const Rule& rule, const std::set<std::string>& avoid)
{
    std::set<std::string> taken = avoid;
    const auto own = rule.vars_ordered();
    taken.insert(own.begin(), own.end());

    std::map<std::string, std::string> ren;
    for (const auto& v : own) {
        if (!avoid.contains(v))
            continue;
        for (std::size_t k = 1;; ++k) {
            std::string candidate = v + std::to_string(k);
            if (!taken.contains(candidate)) {
                taken.insert(candidate);
                ren.emplace(v, std::move(candidate));
                break;
            }
        }
    }
    return ren.empty() ? rule : rename_vars(rule, ren);
}

namespace {

struct Bijection {
    std::map<std::string, std::string> fwd, bwd;

    bool link(const std::string& a, const std::string& b)
    {
        auto f = fwd.find(a);
        auto r = bwd.find(b);
        if (f == fwd.end() && r == bwd.end()) {
            fwd.emplace(a, b);
            bwd.emplace(b, a);
            return true;
        }
        return f != fwd.end() && r != bwd.end() && f->second == b && r->second == a;
    }
};

bool alpha_terms(const Term& a, const Term& b, Bijection& bij)
{
    if (a.is_var() || b.is_var())
        return a.is_var() && b.is_var() && bij.link(a.name(), b.name());
    if (a.name() != b.name() || a.arity() != b.arity())
        return false;
    for (std::size_t i = 0; i < a.arity(); ++i)
        if (!alpha_terms(a.args()[i], b.args()[i], bij))
            return false;
    return true;
}

bool alpha_tuples(std::span<const Term> a, std::span<const Term> b, Bijection& bij)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!alpha_terms(a[i], b[i], bij))
            return false;
    return true;
}

}  // namespace

bool alpha_equal(const Rule& a, const Rule& b)
{
    if (a.fn != b.fn || a.conditions.size() != b.conditions.size())
        return false;
    Bijection bij;
    if (!alpha_tuples(a.params, b.params, bij) || !alpha_tuples(a.results, b.results, bij))
        return false;
    for (std::size_t i = 0; i < a.conditions.size(); ++i) {
        const auto& ca = a.conditions[i];
        const auto& cb = b.conditions[i];
        if (ca.fn != cb.fn || !alpha_tuples(ca.args, cb.args, bij) ||
            !alpha_tuples(ca.results, cb.results, bij))
            return false;
    }
    return true;
}

bool alpha_equal(std::span<const Rule> a, std::span<const Rule> b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!alpha_equal(a[i], b[i]))
            return false;
    return true;
}

bool alpha_equal(const System& a, const System& b)
{
    return alpha_equal(std::span<const Rule>(a.rules), std::span<const Rule>(b.rules));
}

}  // namespace ccsinv
