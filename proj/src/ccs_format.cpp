#include "ccsinv/ccs_format.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace ccsinv {

std::string ParseDiagnostic::to_string() const
{
    return std::to_string(line) + ":" + std::to_string(column) + ": " +
           (severity == Severity::error ? "error: " : "warning: ") + message;
}

namespace {

std::string first_error_message(const std::vector<ParseDiagnostic>& diags)
{
    for (const auto& d : diags)
        if (d.severity == Severity::error)
            return d.to_string();
    return diags.empty() ? std::string("parse error") : diags.front().to_string();
}

}  // namespace

ParseError::ParseError(std::vector<ParseDiagnostic> diags)
    : std::runtime_error(first_error_message(diags)), diags_(std::move(diags))
{
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { lparen, rparen, comma, arrow, implied_by, langle, rangle, lbrace, rbrace, ident, end };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line, column;
};

bool is_ident_char(char c)
{
    static constexpr std::string_view extra = "_'!:.+*#@^~|/&?";
    return std::isalnum(static_cast<unsigned char>(c)) || extra.find(c) != std::string_view::npos;
}

struct Failure {
    std::size_t line, column;
    std::string message;
};

std::vector<Token> lex(std::string_view src)
{
    std::vector<Token> out;
    std::size_t line = 1, col = 1, i = 0;
    std::size_t last_line = 1, last_col = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (!std::isspace(static_cast<unsigned char>(src[i]))) {
                last_line = line;
                last_col = col;
            }
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '%') {
            while (i < src.size() && src[i] != '\n')
                advance(1);
            continue;
        }
        const std::size_t l = line, cl = col;
        auto single = [&](Tok k) {
            out.push_back({k, std::string(1, c), l, cl});
            advance(1);
        };
        switch (c) {
        case '(': single(Tok::lparen); continue;
        case ')': single(Tok::rparen); continue;
        case ',': single(Tok::comma); continue;
        case '{': single(Tok::lbrace); continue;
        case '}': single(Tok::rbrace); continue;
        case '>': single(Tok::rangle); continue;
        case '-':
            if (i + 1 < src.size() && src[i + 1] == '>') {
                out.push_back({Tok::arrow, "->", l, cl});
                advance(2);
                continue;
            }
            throw Failure{l, cl, "unexpected character '-'"};
        case '<':
            if (i + 1 < src.size() && src[i + 1] == '=') {
                out.push_back({Tok::implied_by, "<=", l, cl});
                advance(2);
            } else {
                single(Tok::langle);
            }
            continue;
        default:
            break;
        }
        if (!is_ident_char(c))
            throw Failure{l, cl, std::string("unexpected character '") + c + "'"};
        std::size_t j = i;
        while (j < src.size() && is_ident_char(src[j]))
            ++j;
        out.push_back({Tok::ident, std::string(src.substr(i, j - i)), l, cl});
        advance(j - i);
    }
    // end of input is reported at the last visible character
    out.push_back({Tok::end, "", last_line, last_col});
    return out;
}

// ---------------------------------------------------------------------------
// Raw syntax tree, before symbol classification

struct Pos {
    std::size_t line, column;
};

struct RawTerm {
    std::string name;
    bool has_parens = false;
    std::vector<RawTerm> args;
    Pos pos;
};

struct RawCall {
    std::string name;
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> iosets;
    std::vector<RawTerm> args;
    Pos pos;
};

struct RawCond {
    RawCall call;
    std::vector<RawTerm> results;
    Pos tuple_pos;
};

struct RawRule {
    RawCall head;
    std::vector<RawTerm> results;
    Pos tuple_pos;
    std::vector<RawCond> conditions;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }
    bool at(Tok k) const { return peek().kind == k; }

    [[noreturn]] void fail(const Token& t, const std::string& msg) const
    {
        throw Failure{t.line, t.column, msg};
    }

    const Token& expect(Tok k, const char* what)
    {
        if (!at(k))
            fail(peek(), std::string("expected ") + what + (at(Tok::end) ? ", found end of input"
                                                                          : ", found '" + peek().text + "'"));
        return next();
    }

    void expect_keyword(const char* kw)
    {
        const Token& t = expect(Tok::ident, kw);
        if (t.text != kw)
            fail(t, std::string("expected ") + kw + ", found '" + t.text + "'");
    }

    std::vector<std::size_t> index_set()
    {
        expect(Tok::lbrace, "'{'");
        std::vector<std::size_t> out;
        if (at(Tok::rbrace)) {
            next();
            return out;
        }
        for (;;) {
            const Token& t = expect(Tok::ident, "index");
            if (t.text.empty() || !std::all_of(t.text.begin(), t.text.end(),
                                               [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
                fail(t, "io-set index must be a natural number, found '" + t.text + "'");
            std::size_t v = 0;
            for (char c : t.text) {
                v = v * 10 + static_cast<std::size_t>(c - '0');
                if (v > 100000)
                    fail(t, "io-set index out of range");
            }
            out.push_back(v);
            if (at(Tok::comma)) {
                next();
                continue;
            }
            expect(Tok::rbrace, "',' or '}'");
            return out;
        }
    }

    RawTerm term()
    {
        const Token& t = expect(Tok::ident, "term");
        RawTerm out{t.text, false, {}, {t.line, t.column}};
        if (at(Tok::lbrace))
            fail(peek(), "io-set suffix on '" + t.text + "' inside a term");
        if (at(Tok::lparen)) {
            next();
            out.has_parens = true;
            out.args = term_list(Tok::rparen, "')'");
        }
        return out;
    }

    // term {"," term} close ; requires at least one term
    std::vector<RawTerm> term_list(Tok close, const char* close_name)
    {
        std::vector<RawTerm> out;
        out.push_back(term());
        while (at(Tok::comma)) {
            next();
            out.push_back(term());
        }
        expect(close, (std::string("',' or ") + close_name).c_str());
        return out;
    }

    std::vector<RawTerm> tuple()
    {
        expect(Tok::langle, "'<'");
        if (at(Tok::rangle)) {
            next();
            return {};
        }
        return term_list(Tok::rangle, "'>'");
    }

    RawCall call()
    {
        const Token& t = expect(Tok::ident, "function call");
        RawCall out{t.text, {}, {}, {t.line, t.column}};
        while (at(Tok::lbrace)) {
            auto in = index_set();
            if (!at(Tok::lbrace))
                fail(peek(), "io-set suffix needs an input set followed by an output set");
            auto outs = index_set();
            out.iosets.emplace_back(std::move(in), std::move(outs));
            out.name += suffix_text(out.iosets.back());
        }
        if (at(Tok::lparen)) {
            next();
            out.args = term_list(Tok::rparen, "')'");
        }
        return out;
    }

    static std::string suffix_text(const std::pair<std::vector<std::size_t>, std::vector<std::size_t>>& p)
    {
        auto set = [](const std::vector<std::size_t>& v) {
            std::string s = "{";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i)
                    s += ',';
                s += std::to_string(v[i]);
            }
            return s + "}";
        };
        return set(p.first) + set(p.second);
    }

    RawRule rule()
    {
        RawRule r;
        r.head = call();
        expect(Tok::arrow, "'->'");
        r.tuple_pos = {peek().line, peek().column};
        r.results = tuple();
        if (at(Tok::implied_by)) {
            next();
            for (;;) {
                RawCond c;
                c.call = call();
                expect(Tok::arrow, "'->'");
                c.tuple_pos = {peek().line, peek().column};
                c.results = tuple();
                r.conditions.push_back(std::move(c));
                if (!at(Tok::comma))
                    break;
                next();
            }
        }
        return r;
    }

    std::size_t pos_ = 0;
    std::vector<Token> toks_;
};

struct File {
    std::vector<std::pair<std::string, Pos>> vars;
    std::vector<std::pair<std::string, Pos>> constructors;
    std::vector<RawRule> rules;
};

File parse_file(Parser& p)
{
    File f;
    p.expect(Tok::lparen, "'(VAR'");
    p.expect_keyword("VAR");
    while (p.at(Tok::ident)) {
        const Token& t = p.next();
        f.vars.emplace_back(t.text, Pos{t.line, t.column});
    }
    p.expect(Tok::rparen, "')' closing VAR block");
    p.expect(Tok::lparen, "'(RULES'");
    const Token& kw = p.expect(Tok::ident, "RULES");
    if (kw.text == "CONSTRUCTORS") {
        while (p.at(Tok::ident)) {
            const Token& t = p.next();
            f.constructors.emplace_back(t.text, Pos{t.line, t.column});
        }
        p.expect(Tok::rparen, "')' closing CONSTRUCTORS block");
        p.expect(Tok::lparen, "'(RULES'");
        p.expect_keyword("RULES");
    } else if (kw.text != "RULES") {
        p.fail(kw, "expected RULES or CONSTRUCTORS, found '" + kw.text + "'");
    }
    while (!p.at(Tok::rparen)) {
        if (p.at(Tok::end))
            p.fail(p.peek(), "expected ')' closing RULES block, found end of input");
        f.rules.push_back(p.rule());
    }
    p.next();
    if (!p.at(Tok::end))
        p.fail(p.peek(), "unexpected '" + p.peek().text + "' after RULES block");
    return f;
}

// ---------------------------------------------------------------------------
// Classification

class Builder {
public:
    Builder(const File& f, std::vector<ParseDiagnostic>& diags) : file_(f), diags_(diags)
    {
        for (const auto& [name, pos] : f.vars) {
            if (!vars_.insert(name).second)
                warn(pos, "variable '" + name + "' declared twice");
            var_pos_.emplace(name, pos);
        }
        for (const auto& [name, pos] : f.constructors) {
            if (vars_.contains(name))
                error(pos, "'" + name + "' declared both as variable and constructor");
            declared_ctors_.emplace(name, pos);
        }
    }

    std::optional<System> build()
    {
        // Pass 1: defined symbols and their arities.
        for (const auto& r : file_.rules) {
            head(r.head, r.results.size(), r.tuple_pos, true);
            for (const auto& c : r.conditions)
                head(c.call, c.results.size(), c.tuple_pos, false);
        }
        // Output arities of symbols that only appear in conditions.
        for (auto& [name, info] : defined_)
            if (!info.out)
                info.out = info.cond_out;

        // Pass 2: terms.
        System sys;
        for (const auto& r : file_.rules) {
            Rule rule;
            rule.fn = r.head.name;
            rule.params = terms(r.head.args);
            rule.results = terms(r.results);
            for (const auto& c : r.conditions)
                rule.conditions.push_back({c.call.name, terms(c.call.args), terms(c.results)});
            sys.rules.push_back(std::move(rule));
        }
        check_iosets();
        used_vars_check();

        if (std::any_of(diags_.begin(), diags_.end(), [](const auto& d) { return d.severity == Severity::error; }))
            return std::nullopt;

        for (const auto& [name, info] : defined_)
            sys.signature.emplace(name, Symbol{name, SymbolKind::defined, info.in, *info.out});
        for (const auto& [name, info] : ctors_)
            sys.signature.emplace(name, Symbol{name, SymbolKind::constructor, info.arity, 0});
        return sys;
    }

private:
    struct DefInfo {
        std::size_t in;
        std::optional<std::size_t> out;
        std::optional<std::size_t> cond_out;
        Pos first;
        std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> iosets;
    };
    struct CtorInfo {
        std::size_t arity;
    };

    void error(Pos p, std::string msg) { diags_.push_back({Severity::error, p.line, p.column, std::move(msg)}); }
    void warn(Pos p, std::string msg) { diags_.push_back({Severity::warning, p.line, p.column, std::move(msg)}); }

    void head(const RawCall& c, std::size_t width, Pos tuple_pos, bool is_rule_head)
    {
        if (vars_.contains(c.name)) {
            error(c.pos, "variable '" + c.name + "' used as a function symbol");
            return;
        }
        if (declared_ctors_.contains(c.name)) {
            error(c.pos, std::string(is_rule_head ? "rule" : "condition") + " head '" + c.name +
                             "' is a constructor");
            return;
        }
        auto [it, inserted] = defined_.try_emplace(c.name, DefInfo{c.args.size(), {}, {}, c.pos, c.iosets});
        DefInfo& info = it->second;
        if (!inserted && info.in != c.args.size())
            error(c.pos, "defined symbol '" + c.name + "' used with " + std::to_string(c.args.size()) +
                             " arguments, expected " + std::to_string(info.in));
        auto& slot = is_rule_head ? info.out : info.cond_out;
        if (!slot) {
            slot = width;
        } else if (*slot != width) {
            error(tuple_pos, "tuple width mismatch for '" + c.name + "': " + std::to_string(width) +
                                 " vs " + std::to_string(*slot));
        }
        if (!is_rule_head && info.out && *info.out != width)
            error(tuple_pos, "tuple width mismatch for '" + c.name + "': condition expects " +
                                 std::to_string(width) + ", rules produce " + std::to_string(*info.out));
        if (is_rule_head && info.cond_out && *info.cond_out != width)
            error(tuple_pos, "tuple width mismatch for '" + c.name + "': rule produces " +
                                 std::to_string(width) + ", conditions expect " + std::to_string(*info.cond_out));
    }

    Term term(const RawTerm& t)
    {
        if (vars_.contains(t.name)) {
            if (t.has_parens)
                error(t.pos, "variable '" + t.name + "' used with arguments");
            used_vars_.insert(t.name);
            return Term::var(t.name);
        }
        if (defined_.contains(t.name))
            error(t.pos, "defined symbol '" + t.name + "' used inside a term");
        auto [it, inserted] = ctors_.try_emplace(t.name, CtorInfo{t.args.size()});
        if (!inserted && it->second.arity != t.args.size())
            error(t.pos, "constructor '" + t.name + "' used with " + std::to_string(t.args.size()) +
                             " arguments, previously with " + std::to_string(it->second.arity));
        std::vector<Term> args;
        for (const auto& a : t.args)
            args.push_back(term(a));
        return Term::app(t.name, std::move(args));
    }

    std::vector<Term> terms(const std::vector<RawTerm>& ts)
    {
        std::vector<Term> out;
        for (const auto& t : ts)
            out.push_back(term(t));
        return out;
    }

    void check_iosets()
    {
        for (const auto& [name, info] : defined_) {
            if (info.iosets.empty())
                continue;
            const auto& [in_set, out_set] = info.iosets.back();
            bool bad = false;
            for (const auto* s : {&in_set, &out_set}) {
                for (std::size_t i = 0; i < s->size(); ++i)
                    if ((*s)[i] == 0 || (i > 0 && (*s)[i] <= (*s)[i - 1]))
                        bad = true;
            }
            if (bad) {
                error(info.first, "io-set indices of '" + name + "' must be positive and strictly ascending");
                continue;
            }
            const std::size_t out = info.out.value_or(0);
            const std::size_t total = info.in + out;
            const std::size_t max_in = in_set.empty() ? 0 : in_set.back();
            const std::size_t max_out = out_set.empty() ? 0 : out_set.back();
            if (in_set.size() + out_set.size() != info.in) {
                error(info.first, "io-set indices of '" + name + "' out of range: suffix selects " +
                                      std::to_string(in_set.size() + out_set.size()) + " inputs but symbol has " +
                                      std::to_string(info.in));
                continue;
            }
            // Prefix symbol (everything before the last suffix pair).
            const std::string prefix = name.substr(0, name.size() - Parser::suffix_text(info.iosets.back()).size());
            if (auto base = defined_.find(prefix); base != defined_.end()) {
                const std::size_t bin = base->second.in, bout = base->second.out.value_or(0);
                if (max_in > bin || max_out > bout || bin + bout != total)
                    error(info.first, "io-set indices of '" + name + "' out of range for '" + prefix + "' (" +
                                          std::to_string(bin) + " inputs, " + std::to_string(bout) + " outputs)");
            } else if (max_in + max_out > total) {
                error(info.first, "io-set indices of '" + name + "' out of range");
            }
        }
    }

    void used_vars_check()
    {
        for (const auto& [name, pos] : file_.vars)
            if (!used_vars_.contains(name))
                warn(pos, "variable '" + name + "' declared but never used");
    }

    const File& file_;
    std::vector<ParseDiagnostic>& diags_;
    std::set<std::string> vars_;
    std::set<std::string> used_vars_;
    std::map<std::string, Pos> var_pos_;
    std::map<std::string, Pos> declared_ctors_;
    std::map<std::string, DefInfo> defined_;
    std::map<std::string, CtorInfo> ctors_;
};

}  // namespace

ParseResult parse(std::string_view text)
{
    ParseResult result;
    try {
        Parser p(lex(text));
        File f = parse_file(p);
        Builder b(f, result.diagnostics);
        result.system = b.build();
    } catch (const Failure& e) {
        result.diagnostics.push_back({Severity::error, e.line, e.column, e.message});
        result.system.reset();
    }
    return result;
}

System parse_or_throw(std::string_view text)
{
    auto r = parse(text);
    if (!r.system)
        throw ParseError(std::move(r.diagnostics));
    return std::move(*r.system);
}

namespace {

Term ground(const RawTerm& t)
{
    std::vector<Term> args;
    for (const auto& a : t.args)
        args.push_back(ground(a));
    return Term::app(t.name, std::move(args));
}

template <typename F>
auto parse_fragment(std::string_view text, F&& body)
{
    try {
        Parser p(lex(text));
        auto v = body(p);
        if (!p.at(Tok::end))
            p.fail(p.peek(), "unexpected '" + p.peek().text + "'");
        return v;
    } catch (const Failure& e) {
        throw ParseError({{Severity::error, e.line, e.column, e.message}});
    }
}

}  // namespace

Query parse_query(std::string_view text)
{
    return parse_fragment(text, [](Parser& p) {
        RawCall c = p.call();
        Query q{c.name, {}};
        for (const auto& a : c.args)
            q.args.push_back(ground(a));
        return q;
    });
}

Term parse_ground_term(std::string_view text)
{
    return parse_fragment(text, [](Parser& p) { return ground(p.term()); });
}

std::optional<SplitName> split_name(std::string_view name)
{
    SplitName out;
    auto brace = name.find('{');
    out.base = std::string(name.substr(0, brace));
    if (brace == std::string_view::npos)
        return out;
    try {
        Parser p(lex(name.substr(brace)));
        while (p.at(Tok::lbrace)) {
            auto in = p.index_set();
            auto outs = p.index_set();
            out.iosets.emplace_back(std::move(in), std::move(outs));
        }
        if (!p.at(Tok::end))
            return std::nullopt;
    } catch (const Failure&) {
        return std::nullopt;
    }
    return out;
}

std::string print(const System& system)
{
    std::set<std::string> vars;
    for (const auto& r : system.rules) {
        auto v = r.vars();
        vars.insert(v.begin(), v.end());
    }
    std::string s = "(VAR";
    for (const auto& v : vars)
        s += " " + v;
    s += ")\n(RULES\n";
    for (const auto& r : system.rules)
        s += r.to_string() + "\n";
    s += ")";
    return s;
}

namespace {

std::string latex_ident(std::string_view name)
{
    std::string s;
    for (char c : name) {
        if (c == '_')
            s += "\\_";
        else
            s += c;
    }
    return s;
}

std::string latex_set(const std::vector<std::size_t>& v)
{
    std::string s = "{\\{";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += ',';
        s += std::to_string(v[i]);
    }
    return s + "\\}}";
}

std::string latex_symbol(const std::string& name)
{
    auto split = split_name(name);
    if (!split)
        return latex_ident(name);
    std::string s = latex_ident(split->base);
    for (std::size_t i = 0; i < split->iosets.size(); ++i) {
        if (i)
            s += "{}";
        s += "_" + latex_set(split->iosets[i].first) + "^" + latex_set(split->iosets[i].second);
    }
    return s;
}

std::string latex_term(const Term& t)
{
    std::string s = latex_ident(t.name());
    if (t.is_var() || t.args().empty())
        return s;
    s += '(';
    for (std::size_t i = 0; i < t.arity(); ++i) {
        if (i)
            s += ',';
        s += latex_term(t.args()[i]);
    }
    return s + ')';
}

std::string latex_call(const std::string& fn, std::span<const Term> args)
{
    std::string s = latex_symbol(fn);
    if (args.empty())
        return s;
    s += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i)
            s += ',';
        s += latex_term(args[i]);
    }
    return s + ')';
}

std::string latex_tuple(std::span<const Term> ts)
{
    std::string s = "\\langle ";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i)
            s += ',';
        s += latex_term(ts[i]);
    }
    return s + (ts.empty() ? "\\rangle" : " \\rangle");
}

}  // namespace

std::string to_latex(const System& system)
{
    std::string s = "\\begin{align*}\n";
    for (std::size_t i = 0; i < system.rules.size(); ++i) {
        const Rule& r = system.rules[i];
        s += latex_call(r.fn, r.params) + " \\to " + latex_tuple(r.results);
        for (std::size_t k = 0; k < r.conditions.size(); ++k) {
            const auto& c = r.conditions[k];
            s += k == 0 ? " \\Leftarrow " : ", ";
            s += latex_call(c.fn, c.args) + " \\to " + latex_tuple(c.results);
        }
        if (i + 1 < system.rules.size())
            s += " \\\\";
        s += "\n";
    }
    return s + "\\end{align*}";
}

}  // namespace ccsinv
