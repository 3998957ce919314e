#include "ccsinv/service.hpp"

#include <algorithm>
#include <filesystem>

#include <httplib.h>
#include <json.hpp>

#include "ccsinv/ccs_format.hpp"
#include "ccsinv/corpus.hpp"
#include "ccsinv/diagnostics.hpp"
#include "ccsinv/inversion.hpp"
#include "ccsinv/rewrite.hpp"

namespace ccsinv {

using nlohmann::json;

namespace {

struct BadRequest {
    std::string message;
    std::optional<std::size_t> line = std::nullopt;
    std::optional<std::size_t> column = std::nullopt;
};

ApiResponse reply(int status, const json& j) { return {status, j.dump(), "application/json"}; }

ApiResponse error_reply(const BadRequest& e)
{
    json j{{"ok", false}, {"error", e.message}};
    if (e.line)
        j["line"] = *e.line;
    if (e.column)
        j["column"] = *e.column;
    return reply(400, j);
}

json parse_body(std::string_view body)
{
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw BadRequest{"request body must be a JSON object"};
    return j;
}

std::string require_string(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        throw BadRequest{std::string("field '") + key + "' must be a string"};
    return it->get<std::string>();
}

std::vector<std::size_t> require_indices(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || !it->is_array())
        throw BadRequest{std::string("field '") + key + "' must be an array of positive integers"};
    std::vector<std::size_t> out;
    for (const auto& v : *it) {
        if (!v.is_number_integer() || v.get<long long>() < 1)
            throw BadRequest{std::string("field '") + key + "' must be an array of positive integers"};
        out.push_back(v.get<std::size_t>());
    }
    return out;
}

System parse_ccs(const std::string& text)
{
    auto r = parse(text);
    if (!r.system) {
        for (const auto& d : r.diagnostics)
            if (d.severity == Severity::error)
                throw BadRequest{d.message, d.line, d.column};
        throw BadRequest{"parse error"};
    }
    return std::move(*r.system);
}

json table_json(const ComparisonTable& t)
{
    json rows = json::array();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        json values = json::array();
        for (bool b : t.cells[r])
            values.push_back(b ? "yes" : "no");
        rows.push_back({{"property", t.rows[r]}, {"values", values}});
    }
    return {{"columns", t.columns}, {"rows", rows}};
}

json report_json(const PropertyReport& report)
{
    json j = json::object();
    json witnesses = json::object();
    for (const auto& p : report.properties) {
        j[p.name] = p.holds ? "yes" : "no";
        if (p.witnesses.empty())
            continue;
        json ws = json::array();
        for (const auto& w : p.witnesses)
            ws.push_back({{"symbol", w.symbol}, {"rules", w.rules}, {"detail", w.detail}});
        witnesses[p.name] = ws;
    }
    j["witnesses"] = witnesses;
    return j;
}

json symbols_json(const System& sys)
{
    json out = json::array();
    for (const auto& [name, sym] : sys.signature)
        if (sym.kind == SymbolKind::defined)
            out.push_back({{"name", name}, {"arity_in", sym.arity_in}, {"arity_out", sym.arity_out},
                           {"rules", sys.rules_of(name).size()}});
    return out;
}

template <typename F>
ApiResponse guarded(F&& body)
{
    try {
        return body();
    } catch (const BadRequest& e) {
        return error_reply(e);
    } catch (const ParseError& e) {
        const auto& d = e.diagnostics().front();
        return error_reply({d.message, d.line, d.column});
    } catch (const InversionError& e) {
        return error_reply({e.what()});
    } catch (const EvalError& e) {
        return error_reply({e.what()});
    } catch (const ArityError& e) {
        return error_reply({e.what()});
    } catch (const std::exception& e) {
        return reply(500, json{{"ok", false}, {"error", std::string("internal error: ") + e.what()}});
    }
}

}  // namespace

std::string column_label(std::string_view inverter)
{
    if (inverter == "trivial")
        return "TRIV";
    if (inverter == "full")
        return "FULL";
    if (inverter == "partial")
        return "PART";
    if (inverter == "semi")
        return "SEMI";
    std::string s(inverter);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

ApiResponse handle_invert(std::string_view body)
{
    return guarded([&] {
        const json req = parse_body(body);
        const System sys = parse_ccs(require_string(req, "ccs_text"));
        const std::string fn = require_string(req, "function");
        const std::string inverter = require_string(req, "inverter");
        auto task = make_task(sys, fn, require_indices(req, "I"), require_indices(req, "O"), inverter);
        auto report = invert_system(sys, task);
        const auto table = compare({{"ORIG", sys}, {column_label(inverter), report.produced}});
        return reply(200, json{{"ok", true},
                               {"inverted_ccs_text", print(report.produced)},
                               {"warnings", report.warnings},
                               {"diagnostics_table", table_json(table)}});
    });
}

ApiResponse handle_diagnose(std::string_view body)
{
    return guarded([&] {
        const json req = parse_body(body);
        const System sys = parse_ccs(require_string(req, "ccs_text"));
        return reply(200, json{{"ok", true},
                               {"report", report_json(analyze(sys))},
                               {"diagnostics_table", table_json(compare({{"ORIG", sys}}))},
                               {"symbols", symbols_json(sys)}});
    });
}

ApiResponse handle_parse(std::string_view body)
{
    return guarded([&] {
        const json req = parse_body(body);
        const auto r = parse(require_string(req, "ccs_text"));
        json diags = json::array();
        for (const auto& d : r.diagnostics)
            diags.push_back({{"severity", d.severity == Severity::error ? "error" : "warning"},
                             {"line", d.line},
                             {"column", d.column},
                             {"message", d.message}});
        if (!r.system) {
            BadRequest e{"parse error"};
            for (const auto& d : r.diagnostics)
                if (d.severity == Severity::error) {
                    e = {d.message, d.line, d.column};
                    break;
                }
            auto resp = error_reply(e);
            json j = json::parse(resp.body);
            j["diagnostics"] = diags;
            resp.body = j.dump();
            return resp;
        }
        return reply(200, json{{"ok", true}, {"symbols", symbols_json(*r.system)}, {"diagnostics", diags}});
    });
}

ApiResponse handle_eval(std::string_view body, std::uint64_t budget_cap)
{
    return guarded([&] {
        const json req = parse_body(body);
        const System sys = parse_ccs(require_string(req, "ccs_text"));
        const Query query = parse_query(require_string(req, "query_text"));
        EvalOptions opts;
        if (auto it = req.find("mode"); it != req.end() && !it->is_null()) {
            if (!it->is_string() || (*it != "all" && *it != "first"))
                throw BadRequest{"field 'mode' must be \"all\" or \"first\""};
            opts.mode = *it == "first" ? EvalMode::first : EvalMode::all;
        }
        opts.budget = budget_cap;
        if (auto it = req.find("budget"); it != req.end() && !it->is_null()) {
            if (!it->is_number_integer() || it->get<long long>() < 0)
                throw BadRequest{"field 'budget' must be a non-negative integer"};
            opts.budget = std::min(budget_cap, it->get<std::uint64_t>());
        }
        const auto out = evaluate(sys, query, opts);
        json results = json::array();
        for (const auto& t : out.results)
            results.push_back(tuple_to_string(t));
        return reply(200, json{{"ok", true},
                               {"results", results},
                               {"rewrite_steps", out.stats.rewrite_steps},
                               {"function_calls", out.stats.function_calls},
                               {"exhausted", out.stats.exhausted}});
    });
}

ApiResponse handle_latex(std::string_view body)
{
    return guarded([&] {
        const json req = parse_body(body);
        const System sys = parse_ccs(require_string(req, "ccs_text"));
        return reply(200, json{{"ok", true}, {"latex", to_latex(sys)}});
    });
}

ApiResponse handle_examples()
{
    json names = json::array();
    for (const auto& e : examples())
        names.push_back(std::string(e.name));
    return reply(200, json{{"examples", names}});
}

ApiResponse handle_example(std::string_view name)
{
    if (const Example* e = find_example(name))
        return {200, std::string(e->text), "text/plain; charset=utf-8"};
    return reply(404, json{{"ok", false}, {"error", "no example named '" + std::string(name) + "'"}});
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>ccsinv</title></head>
<body>
<h1>ccsinv service</h1>
<p>The web UI is not installed. JSON endpoints:</p>
<ul>
<li>POST /api/invert, /api/diagnose, /api/parse, /api/eval, /api/latex</li>
<li>GET /api/examples, /api/examples/{name}</li>
</ul>
</body></html>
)";

}  // namespace

struct Server::Impl {
    ServiceOptions options;
    httplib::Server http;
    int bound_port = -1;
};

Server::Server(ServiceOptions options) : impl_(std::make_unique<Impl>())
{
    impl_->options = std::move(options);
    auto& http = impl_->http;
    const std::uint64_t cap = impl_->options.budget_cap;

    auto send = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    http.Post("/api/invert", [send](const httplib::Request& req, httplib::Response& res) {
        send(res, handle_invert(req.body));
    });
    http.Post("/api/diagnose", [send](const httplib::Request& req, httplib::Response& res) {
        send(res, handle_diagnose(req.body));
    });
    http.Post("/api/parse", [send](const httplib::Request& req, httplib::Response& res) {
        send(res, handle_parse(req.body));
    });
    http.Post("/api/eval", [send, cap](const httplib::Request& req, httplib::Response& res) {
        send(res, handle_eval(req.body, cap));
    });
    http.Post("/api/latex", [send](const httplib::Request& req, httplib::Response& res) {
        send(res, handle_latex(req.body));
    });
    http.Get("/api/examples", [send](const httplib::Request&, httplib::Response& res) {
        send(res, handle_examples());
    });
    http.Get(R"(/api/examples/([A-Za-z0-9_'!]+))", [send](const httplib::Request& req, httplib::Response& res) {
        send(res, handle_example(req.matches[1].str()));
    });

    const auto& dir = impl_->options.static_dir;
    if (!dir.empty() && std::filesystem::is_directory(dir)) {
        http.set_mount_point("/", dir);
    } else {
        http.Get("/", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
        });
    }
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
        res.status = 500;
        res.set_content(R"({"ok":false,"error":"internal error"})", "application/json");
    });
}

Server::~Server() { stop(); }

bool Server::listen(int port) { return impl_->http.listen(impl_->options.host, port); }

int Server::bind_any_port()
{
    impl_->bound_port = impl_->http.bind_to_any_port(impl_->options.host);
    return impl_->bound_port;
}

bool Server::listen_after_bind() { return impl_->http.listen_after_bind(); }

void Server::stop()
{
    if (impl_)
        impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace ccsinv
