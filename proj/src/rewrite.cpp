#include "ccsinv/rewrite.hpp"

#include <map>
#include <unordered_map>

namespace ccsinv {

namespace {

// ---------------------------------------------------------------------------
// Compiled form: constructors interned, rule variables mapped to slots.

struct VNode;
using Value = std::shared_ptr<const VNode>;

struct VNode {
    int ctor;
    std::vector<Value> args;
};

bool equal(const Value& a, const Value& b)
{
    if (a == b)
        return true;
    if (a->ctor != b->ctor || a->args.size() != b->args.size())
        return false;
    for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!equal(a->args[i], b->args[i]))
            return false;
    return true;
}

using Env = std::vector<Value>;

struct Pat {
    int slot = -1;  // >= 0: variable
    int ctor = -1;
    std::vector<Pat> args;
    Value constant;  // set when the pattern is ground
};

struct CCond {
    int fn;
    std::vector<Pat> args;
    std::vector<Pat> results;
};

struct CRule {
    std::size_t index;  // 1-based position in the system
    std::vector<Pat> params;
    std::vector<Pat> results;
    std::vector<CCond> conds;
    std::size_t slots = 0;
    std::vector<std::string> slot_names;
    std::string text;
};

struct CFunc {
    std::string name;
    std::size_t arity_in = 0, arity_out = 0;
    std::vector<CRule> rules;
};

class Program {
public:
    explicit Program(const System& sys)
    {
        for (const auto& [name, sym] : sys.signature)
            if (sym.kind == SymbolKind::defined)
                fn_id(name, sym.arity_in, sym.arity_out);
        for (std::size_t i = 0; i < sys.rules.size(); ++i) {
            const Rule& r = sys.rules[i];
            int f = fn_id(r.fn, r.params.size(), r.results.size());
            std::map<std::string, int> slots;
            CRule cr;
            cr.index = i + 1;
            cr.text = r.to_string();
            cr.params = pats(r.params, slots);
            cr.results = pats(r.results, slots);
            for (const auto& c : r.conditions)
                cr.conds.push_back({fn_id(c.fn, c.args.size(), c.results.size()), pats(c.args, slots),
                                    pats(c.results, slots)});
            cr.slots = slots.size();
            cr.slot_names.resize(slots.size());
            for (const auto& [name, s] : slots)
                cr.slot_names[static_cast<std::size_t>(s)] = name;
            funcs_[static_cast<std::size_t>(f)].rules.push_back(std::move(cr));
        }
    }

    const CFunc* find(const std::string& name) const
    {
        auto it = fn_ids_.find(name);
        return it == fn_ids_.end() ? nullptr : &funcs_[static_cast<std::size_t>(it->second)];
    }
    const CFunc& func(int id) const { return funcs_[static_cast<std::size_t>(id)]; }

    Value value(const Term& t)
    {
        if (t.is_var())
            throw EvalError("query argument contains variable '" + t.name() + "'");
        if (fn_ids_.contains(t.name()))
            throw EvalError("defined symbol '" + t.name() + "' used inside a term");
        auto v = std::make_shared<VNode>();
        v->ctor = ctor_id(t.name());
        for (const auto& a : t.args())
            v->args.push_back(value(a));
        return v;
    }

    Term term(const Value& v) const
    {
        std::vector<Term> args;
        args.reserve(v->args.size());
        for (const auto& a : v->args)
            args.push_back(term(a));
        return Term::app(ctor_names_[static_cast<std::size_t>(v->ctor)], std::move(args));
    }

    std::string goal_text(const CFunc& f, const std::vector<Value>& args) const
    {
        std::string s = f.name;
        if (!args.empty()) {
            s += '(';
            for (std::size_t i = 0; i < args.size(); ++i) {
                if (i)
                    s += ',';
                s += term(args[i]).to_string();
            }
            s += ')';
        }
        return s;
    }

private:
    int fn_id(const std::string& name, std::size_t in, std::size_t out)
    {
        auto [it, inserted] = fn_ids_.try_emplace(name, static_cast<int>(funcs_.size()));
        if (inserted)
            funcs_.push_back(CFunc{name, in, out, {}});
        const CFunc& f = funcs_[static_cast<std::size_t>(it->second)];
        if (f.arity_in != in || f.arity_out != out)
            throw ArityError("symbol '" + name + "' used with inconsistent arity");
        return it->second;
    }

    int ctor_id(const std::string& name)
    {
        auto [it, inserted] = ctor_ids_.try_emplace(name, static_cast<int>(ctor_names_.size()));
        if (inserted)
            ctor_names_.push_back(name);
        return it->second;
    }

    Pat pat(const Term& t, std::map<std::string, int>& slots)
    {
        Pat p;
        if (t.is_var()) {
            auto [it, _] = slots.try_emplace(t.name(), static_cast<int>(slots.size()));
            p.slot = it->second;
            return p;
        }
        p.ctor = ctor_id(t.name());
        for (const auto& a : t.args())
            p.args.push_back(pat(a, slots));
        if (t.is_ground()) {
            auto v = std::make_shared<VNode>();
            v->ctor = p.ctor;
            for (const auto& a : p.args)
                v->args.push_back(a.constant);
            p.constant = v;
        }
        return p;
    }

    std::vector<Pat> pats(std::span<const Term> ts, std::map<std::string, int>& slots)
    {
        std::vector<Pat> out;
        for (const auto& t : ts)
            out.push_back(pat(t, slots));
        return out;
    }

    std::unordered_map<std::string, int> fn_ids_;
    std::vector<CFunc> funcs_;
    std::unordered_map<std::string, int> ctor_ids_;
    std::vector<std::string> ctor_names_;
};

bool match(const Pat& p, const Value& v, Env& env)
{
    if (p.slot >= 0) {
        Value& b = env[static_cast<std::size_t>(p.slot)];
        if (b)
            return equal(b, v);
        b = v;
        return true;
    }
    if (p.constant)
        return equal(p.constant, v);
    if (p.ctor != v->ctor || p.args.size() != v->args.size())
        return false;
    for (std::size_t i = 0; i < p.args.size(); ++i)
        if (!match(p.args[i], v->args[i], env))
            return false;
    return true;
}

bool match_all(const std::vector<Pat>& ps, const std::vector<Value>& vs, Env& env)
{
    for (std::size_t i = 0; i < ps.size(); ++i)
        if (!match(ps[i], vs[i], env))
            return false;
    return true;
}

Value build(const Pat& p, const Env& env, const CRule& rule)
{
    if (p.constant)
        return p.constant;
    if (p.slot >= 0) {
        const Value& b = env[static_cast<std::size_t>(p.slot)];
        if (!b)
            throw InstantiationFault("free variable '" + rule.slot_names[static_cast<std::size_t>(p.slot)] +
                                     "' after instantiation in rule " + std::to_string(rule.index) + ": " +
                                     rule.text);
        return b;
    }
    auto v = std::make_shared<VNode>();
    v->ctor = p.ctor;
    v->args.reserve(p.args.size());
    for (const auto& a : p.args)
        v->args.push_back(build(a, env, rule));
    return v;
}

std::vector<Value> build_all(const std::vector<Pat>& ps, const Env& env, const CRule& rule)
{
    std::vector<Value> out;
    out.reserve(ps.size());
    for (const auto& p : ps)
        out.push_back(build(p, env, rule));
    return out;
}

// ---------------------------------------------------------------------------
// Search machine. Each goal is a suspended generator (Frame); the chain of
// frames currently being asked for a value is kept on an explicit stack so
// deep searches do not consume native stack.

struct Frame {
    const CFunc* fn = nullptr;
    std::vector<Value> args;
    std::size_t next_rule = 0;
    const CRule* rule = nullptr;
    bool resume_choice = false;  // after a yield from a conditional rule

    struct Choice {
        Env env;  // bindings before this condition
        std::unique_ptr<Frame> child;
    };
    std::vector<Choice> choices;
    TraceGoal* trace = nullptr;

    Frame() = default;
    Frame(const Frame&) = delete;
    Frame& operator=(const Frame&) = delete;

    ~Frame()
    {
        std::vector<std::unique_ptr<Frame>> pending;
        for (auto& c : choices)
            if (c.child)
                pending.push_back(std::move(c.child));
        while (!pending.empty()) {
            auto f = std::move(pending.back());
            pending.pop_back();
            for (auto& c : f->choices)
                if (c.child)
                    pending.push_back(std::move(c.child));
        }
    }
};

struct BudgetExhausted {};

class Machine {
public:
    Machine(Program& prog, const EvalOptions& opts, bool tracing) : prog_(prog), opts_(opts), tracing_(tracing)
    {
        stats_.budget = opts.budget;
    }

    EvalOutcome run(const CFunc& fn, std::vector<Value> args, std::unique_ptr<TraceGoal>* trace_root)
    {
        EvalOutcome out;
        try {
            std::unique_ptr<TraceGoal> root_trace;
            auto root = dispatch(fn, std::move(args), tracing_ ? &root_trace : nullptr);
            if (trace_root)
                *trace_root = std::move(root_trace);
            drive(*root, out);
        } catch (const BudgetExhausted&) {
            stats_.exhausted = true;
        }
        out.stats = stats_;
        return out;
    }

private:
    struct Reply {
        enum Kind { none, value, exhausted } kind = none;
        std::vector<Value> tuple;
    };

    struct Action {
        enum Kind { descend, yield, done } kind;
        Frame* child = nullptr;
        std::vector<Value> tuple;
    };

    std::unique_ptr<Frame> dispatch(const CFunc& fn, std::vector<Value> args, std::unique_ptr<TraceGoal>* slot)
    {
        if (stats_.budget && stats_.function_calls >= *stats_.budget)
            throw BudgetExhausted{};
        auto f = std::make_unique<Frame>();
        f->fn = &fn;
        f->args = std::move(args);
        if (slot) {
            *slot = std::make_unique<TraceGoal>();
            (*slot)->goal = prog_.goal_text(fn, f->args);
            (*slot)->calls_at_entry = stats_.function_calls;
            (*slot)->steps_at_entry = stats_.rewrite_steps;
            f->trace = slot->get();
        }
        ++stats_.function_calls;
        return f;
    }

    Frame* start_condition(Frame& f, std::size_t k, Env env)
    {
        const CCond& c = f.rule->conds[k];
        std::vector<Value> args = build_all(c.args, env, *f.rule);
        std::unique_ptr<TraceGoal>* slot = nullptr;
        if (f.trace) {
            // no empty slot may be left behind when the budget runs out
            if (stats_.budget && stats_.function_calls >= *stats_.budget)
                throw BudgetExhausted{};
            auto& conds = f.trace->attempts.back().conditions[k];
            conds.emplace_back();
            slot = &conds.back();
        }
        auto child = dispatch(prog_.func(c.fn), std::move(args), slot);
        Frame* raw = child.get();
        f.choices.push_back({std::move(env), std::move(child)});
        return raw;
    }

    Action yield(Frame& f, const Env& env)
    {
        ++stats_.rewrite_steps;
        if (f.trace)
            ++f.trace->results;
        return {Action::yield, nullptr, build_all(f.rule->results, env, *f.rule)};
    }

    Action next_rule(Frame& f)
    {
        const auto& rules = f.fn->rules;
        while (f.next_rule < rules.size()) {
            const CRule& r = rules[f.next_rule++];
            Env env(r.slots);
            const bool ok = match_all(r.params, f.args, env);
            if (f.trace) {
                f.trace->attempts.push_back({r.index, ok, {}});
                f.trace->attempts.back().conditions.resize(r.conds.size());
            }
            if (!ok)
                continue;
            f.rule = &r;
            if (r.conds.empty()) {
                f.resume_choice = false;
                return yield(f, env);
            }
            return {Action::descend, start_condition(f, 0, std::move(env)), {}};
        }
        return {Action::done, nullptr, {}};
    }

    Action advance(Frame& f, Reply& reply)
    {
        if (reply.kind == Reply::value) {
            Frame::Choice& top = f.choices.back();
            const std::size_t k = f.choices.size() - 1;
            const CCond& c = f.rule->conds[k];
            Env env = top.env;
            if (!match_all(c.results, reply.tuple, env))
                return {Action::descend, top.child.get(), {}};
            if (k + 1 == f.rule->conds.size()) {
                f.resume_choice = true;
                return yield(f, env);
            }
            return {Action::descend, start_condition(f, k + 1, std::move(env)), {}};
        }
        if (reply.kind == Reply::exhausted) {
            f.choices.pop_back();
            if (!f.choices.empty())
                return {Action::descend, f.choices.back().child.get(), {}};
            return next_rule(f);
        }
        if (f.resume_choice && !f.choices.empty())
            return {Action::descend, f.choices.back().child.get(), {}};
        return next_rule(f);
    }

    void drive(Frame& root, EvalOutcome& out)
    {
        std::vector<Frame*> path{&root};
        Reply reply;
        for (;;) {
            Frame& f = *path.back();
            Action act = advance(f, reply);
            reply = Reply{};
            switch (act.kind) {
            case Action::descend:
                path.push_back(act.child);
                break;
            case Action::yield:
                if (path.size() == 1) {
                    std::vector<Term> tuple;
                    for (const auto& v : act.tuple)
                        tuple.push_back(prog_.term(v));
                    out.results.push_back(std::move(tuple));
                    if (opts_.mode == EvalMode::first)
                        return;
                } else {
                    path.pop_back();
                    reply.kind = Reply::value;
                    reply.tuple = std::move(act.tuple);
                }
                break;
            case Action::done:
                if (path.size() == 1)
                    return;
                path.pop_back();
                reply.kind = Reply::exhausted;
                break;
            }
        }
    }

    Program& prog_;
    const EvalOptions& opts_;
    bool tracing_;
    EvalStats stats_;
};

EvalOutcome run(const System& system, const Query& query, const EvalOptions& opts, std::unique_ptr<TraceGoal>* trace)
{
    Program prog(system);
    const CFunc* fn = prog.find(query.fn);
    if (!fn)
        throw UnknownSymbol("unknown symbol '" + query.fn + "'");
    if (query.args.size() != fn->arity_in)
        throw ArityError("'" + query.fn + "' expects " + std::to_string(fn->arity_in) + " arguments, got " +
                         std::to_string(query.args.size()));
    std::vector<Value> args;
    for (const auto& a : query.args)
        args.push_back(prog.value(a));
    Machine m(prog, opts, trace != nullptr);
    return m.run(*fn, std::move(args), trace);
}

}  // namespace

EvalOutcome evaluate(const System& system, const Query& query, const EvalOptions& options)
{
    return run(system, query, options, nullptr);
}

// ---------------------------------------------------------------------------

TraceGoal::~TraceGoal()
{
    std::vector<std::unique_ptr<TraceGoal>> pending;
    auto take = [&](TraceGoal& g) {
        for (auto& a : g.attempts)
            for (auto& c : a.conditions)
                for (auto& sub : c)
                    if (sub)
                        pending.push_back(std::move(sub));
    };
    take(*this);
    while (!pending.empty()) {
        auto g = std::move(pending.back());
        pending.pop_back();
        take(*g);
    }
}

std::size_t Trace::goal_count() const
{
    if (!root)
        return 0;
    std::size_t n = 0;
    std::vector<const TraceGoal*> stack{root.get()};
    while (!stack.empty()) {
        const TraceGoal* g = stack.back();
        stack.pop_back();
        ++n;
        for (const auto& a : g->attempts)
            for (const auto& c : a.conditions)
                for (const auto& sub : c)
                    stack.push_back(sub.get());
    }
    return n;
}

namespace {

void json_string(std::string& out, const std::string& s)
{
    out += '"';
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (static_cast<unsigned char>(c) < 0x20) {
            static const char* hex = "0123456789abcdef";
            out += "\\u00";
            out += hex[(c >> 4) & 0xf];
            out += hex[c & 0xf];
        } else {
            out += c;
        }
    }
    out += '"';
}

}  // namespace

// Iterative writer: traces of nonterminating searches can be far deeper than
// the native stack allows.
std::string Trace::to_json(int indent) const
{
    std::string out;
    if (!root)
        return "null";
    const bool pretty = indent >= 0;
    auto newline = [&](std::size_t depth) {
        if (pretty) {
            out += '\n';
            out.append(depth * static_cast<std::size_t>(indent), ' ');
        }
    };
    // Work items are either a goal to open or a literal to append.
    struct Item {
        const TraceGoal* goal;
        std::string text;
        std::size_t depth;
    };
    std::vector<Item> stack{{root.get(), {}, 0}};
    while (!stack.empty()) {
        Item it = std::move(stack.back());
        stack.pop_back();
        if (!it.goal) {
            if (!it.text.empty() && it.text[0] == '\n') {
                newline(it.depth);
                out += it.text.substr(1);
            } else {
                out += it.text;
            }
            continue;
        }
        const TraceGoal& g = *it.goal;
        const std::size_t d = it.depth;
        const std::string sep = pretty ? ": " : ":";
        out += '{';
        newline(d + 1);
        out += "\"goal\"" + sep;
        json_string(out, g.goal);
        out += ',';
        newline(d + 1);
        out += "\"calls\"" + sep + std::to_string(g.calls_at_entry) + ",";
        newline(d + 1);
        out += "\"steps\"" + sep + std::to_string(g.steps_at_entry) + ",";
        newline(d + 1);
        out += "\"results\"" + sep + std::to_string(g.results) + ",";
        newline(d + 1);
        out += "\"attempts\"" + sep + "[";

        // Build the remainder of this object as pushed items (reverse order).
        std::vector<Item> seq;
        for (std::size_t ai = 0; ai < g.attempts.size(); ++ai) {
            const auto& a = g.attempts[ai];
            std::string head = ai ? "," : "";
            seq.push_back({nullptr, head, 0});
            seq.push_back({nullptr, "\n{\"rule\"" + sep + std::to_string(a.rule_index) + ",\"matched\"" + sep +
                                        (a.matched ? "true" : "false") + ",\"conditions\"" + sep + "[",
                           d + 2});
            for (std::size_t ci = 0; ci < a.conditions.size(); ++ci) {
                seq.push_back({nullptr, std::string(ci ? "," : "") + "[", 0});
                for (std::size_t si = 0; si < a.conditions[ci].size(); ++si) {
                    if (si)
                        seq.push_back({nullptr, ",", 0});
                    seq.push_back({nullptr, "\n", d + 3});
                    seq.push_back({a.conditions[ci][si].get(), {}, d + 3});
                }
                seq.push_back({nullptr, "]", 0});
            }
            seq.push_back({nullptr, "]}", 0});
        }
        if (!g.attempts.empty())
            seq.push_back({nullptr, "\n]", d + 1});
        else
            seq.push_back({nullptr, "]", 0});
        seq.push_back({nullptr, "\n}", d});
        for (auto r = seq.rbegin(); r != seq.rend(); ++r)
            stack.push_back(std::move(*r));
    }
    return out;
}

Trace trace(const System& system, const Query& query, std::optional<std::uint64_t> budget)
{
    Trace t;
    t.outcome = run(system, query, EvalOptions{EvalMode::all, budget}, &t.root);
    return t;
}

Term to_unary(std::uint64_t n)
{
    Term t = Term::app("0");
    for (std::uint64_t i = 0; i < n; ++i)
        t = Term::app("s", {t});
    return t;
}

std::optional<std::uint64_t> from_unary(const Term& t)
{
    std::uint64_t n = 0;
    const Term* cur = &t;
    while (!cur->is_var() && cur->name() == "s" && cur->arity() == 1) {
        ++n;
        cur = &cur->args()[0];
    }
    if (cur->is_var() || cur->name() != "0" || cur->arity() != 0)
        return std::nullopt;
    return n;
}

}  // namespace ccsinv
