// Command-line front end: check, invert, eval, latex, examples, bench-ack, serve.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ccsinv/bench.hpp"
#include "ccsinv/ccs_format.hpp"
#include "ccsinv/corpus.hpp"
#include "ccsinv/diagnostics.hpp"
#include "ccsinv/inversion.hpp"
#include "ccsinv/rewrite.hpp"
#include "ccsinv/service.hpp"

namespace {

using namespace ccsinv;

enum ExitCode { kOk = 0, kInputError = 1, kTransformFailure = 2, kBudgetExhausted = 3 };

struct InputError {
    std::string message;
};

std::string read_source(const std::string& path)
{
    if (path == "-") {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError{"cannot open '" + path + "'"};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

System load(const std::string& path)
{
    const std::string text = read_source(path);
    auto r = parse(text);
    for (const auto& d : r.diagnostics)
        std::cerr << path << ":" << d.to_string() << "\n";
    if (!r.system)
        throw InputError{};
    return std::move(*r.system);
}

// "1,2", "{1,2}", "" or "{}"
std::vector<std::size_t> parse_index_list(const std::string& text)
{
    std::string s;
    for (char c : text)
        if (c != '{' && c != '}' && c != ' ')
            s += c;
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(item, &pos);
            if (pos != item.size() || v < 1)
                throw std::invalid_argument(item);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw InputError{"invalid index '" + item + "' in '" + text + "'"};
        }
    }
    return out;
}

struct InvertArgs {
    std::string file, fn, in, out, inverter = "partial";
    bool with_diagnostics = false;
};

int run_invert(const InvertArgs& a)
{
    const System sys = load(a.file);
    InversionTask task;
    try {
        task = make_task(sys, a.fn, parse_index_list(a.in), parse_index_list(a.out), a.inverter);
    } catch (const InversionError& e) {
        throw InputError{e.what()};
    }
    InversionReport report;
    try {
        report = invert_system(sys, task);
    } catch (const InversionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kTransformFailure;
    }
    for (const auto& w : report.warnings)
        std::cerr << "warning: " << w << "\n";
    std::cout << print(report.produced) << "\n";
    if (a.with_diagnostics)
        std::cerr << compare({{"ORIG", sys}, {column_label(a.inverter), report.produced}}).render();
    return kOk;
}

struct EvalArgs {
    std::string file, query, mode = "all", trace_file;
    std::uint64_t budget = 100'000'000;
    bool stats = false;
};

int run_eval(const EvalArgs& a)
{
    const System sys = load(a.file);
    Query q;
    try {
        q = parse_query(a.query);
    } catch (const ParseError& e) {
        throw InputError{"query: " + std::string(e.what())};
    }
    EvalOptions opts{a.mode == "first" ? EvalMode::first : EvalMode::all, a.budget};
    EvalOutcome out;
    try {
        out = evaluate(sys, q, opts);
        if (!a.trace_file.empty()) {
            const Trace t = trace(sys, q, a.budget);
            std::ofstream f(a.trace_file);
            if (!f)
                throw InputError{"cannot write '" + a.trace_file + "'"};
            f << t.to_json(1) << "\n";
        }
    } catch (const EvalError& e) {
        throw InputError{e.what()};
    } catch (const ArityError& e) {
        throw InputError{e.what()};
    }
    for (const auto& r : out.results)
        std::cout << tuple_to_string(r) << "\n";
    if (a.stats) {
        std::cout << "rewrite_steps: " << out.stats.rewrite_steps << "\n"
                  << "function_calls: " << out.stats.function_calls << "\n"
                  << "exhausted: " << (out.stats.exhausted ? "true" : "false") << "\n";
    }
    if (out.stats.exhausted) {
        std::cerr << "budget of " << a.budget << " function calls exhausted\n";
        return kBudgetExhausted;
    }
    return kOk;
}

int run_bench(const std::string& rows_text, const std::string& out_file)
{
    std::vector<std::uint64_t> xs;
    for (auto v : parse_index_list(rows_text)) {
        if (v > 3)
            throw InputError{"bench rows are 1, 2 or 3"};
        xs.push_back(v);
    }
    const auto report = run_ack_bench(xs);
    std::cout << report.to_text();
    if (!out_file.empty()) {
        std::ofstream text(out_file), json(out_file + ".json");
        if (!text || !json)
            throw InputError{"cannot write '" + out_file + "'"};
        text << report.to_text();
        json << report.to_json() << "\n";
    }
    return kOk;
}

int run_serve(int port, const std::string& static_dir, std::uint64_t cap)
{
    ServiceOptions opts;
    opts.static_dir = static_dir;
    opts.budget_cap = cap;
    if (const char* host = std::getenv("CCSINV_HOST"))
        opts.host = host;
    Server server(opts);
    std::cerr << "serving on http://" << opts.host << ":" << port << "\n";
    if (!server.listen(port)) {
        std::cerr << "error: cannot listen on port " << port << "\n";
        return kInputError;
    }
    return kOk;
}

int default_port()
{
    if (const char* p = std::getenv("CCSINV_PORT")) {
        try {
            return std::stoi(p);
        } catch (const std::exception&) {
        }
    }
    return 8080;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Inversion of conditional constructor term rewriting systems"};
    app.require_subcommand(1);

    std::string file;
    auto* check = app.add_subcommand("check", "Parse a .ctrs file and report its properties");
    check->add_option("FILE", file, "input file ('-' for stdin)")->required();

    InvertArgs inv;
    auto* invert = app.add_subcommand("invert", "Invert a function of a .ctrs file");
    invert->add_option("FILE", inv.file, "input file ('-' for stdin)")->required();
    invert->add_option("--fn", inv.fn, "function to invert")->required();
    invert->add_option("--in", inv.in, "input indices that stay inputs, e.g. 1,2");
    invert->add_option("--out", inv.out, "output indices that become inputs, e.g. 1");
    invert->add_option("--inverter", inv.inverter, "rule inverter")
        ->check(CLI::IsMember({"trivial", "full", "partial", "semi"}));
    invert->add_flag("--with-diagnostics", inv.with_diagnostics, "print the ORIG/inverted comparison to stderr");

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Evaluate a ground query");
    eval->add_option("FILE", ev.file, "input file ('-' for stdin)")->required();
    eval->add_option("--query", ev.query, "query such as \"ack(s(0),s(s(0)))\"")->required();
    eval->add_option("--mode", ev.mode, "all solutions or first solution")
        ->check(CLI::IsMember({"all", "first"}));
    eval->add_option("--budget", ev.budget, "maximum number of function calls");
    eval->add_flag("--stats", ev.stats, "print rewrite steps and function calls");
    eval->add_option("--trace", ev.trace_file, "write the search tree as JSON");

    auto* latex = app.add_subcommand("latex", "Translate a .ctrs file to LaTeX");
    latex->add_option("FILE", file, "input file ('-' for stdin)")->required();

    std::string ex_action = "list", ex_name;
    auto* ex = app.add_subcommand("examples", "List or show bundled examples");
    ex->add_option("ACTION", ex_action, "list or show")->check(CLI::IsMember({"list", "show"}));
    ex->add_option("NAME", ex_name, "example name");

    std::string bench_rows = "1,2,3", bench_out;
    auto* bench = app.add_subcommand("bench-ack", "Rewrite steps and function calls of ack_2 vs ack{1}{1}");
    bench->add_option("--rows", bench_rows, "values of the first input, e.g. 1,3");
    bench->add_option("--out", bench_out, "write the report to FILE (text) and FILE.json");

    int port = default_port();
    std::string static_dir;
    std::uint64_t cap = kDefaultServiceBudget;
    auto* serve = app.add_subcommand("serve", "Run the JSON HTTP service");
    serve->add_option("--port", port, "port (default $CCSINV_PORT or 8080)");
    serve->add_option("--static", static_dir, "directory with the built web UI");
    serve->add_option("--budget-cap", cap, "maximum function calls per /api/eval request");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*check) {
            const System sys = load(file);
            std::cout << analyze(sys).to_text();
            return kOk;
        }
        if (*invert)
            return run_invert(inv);
        if (*eval)
            return run_eval(ev);
        if (*latex) {
            std::cout << to_latex(load(file)) << "\n";
            return kOk;
        }
        if (*ex) {
            if (ex_action == "list") {
                for (const auto& e : examples())
                    std::cout << e.name << "\n";
                return kOk;
            }
            const Example* e = find_example(ex_name);
            if (!e)
                throw InputError{"no example named '" + ex_name + "'"};
            std::cout << e->text;
            return kOk;
        }
        if (*bench)
            return run_bench(bench_rows, bench_out);
        if (*serve)
            return run_serve(port, static_dir, cap);
    } catch (const InputError& e) {
        if (!e.message.empty())
            std::cerr << "error: " << e.message << "\n";
        return kInputError;
    }
    return kInputError;
}
