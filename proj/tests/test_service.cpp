#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "doctest.h"
#include "support.hpp"

#include "ccsinv/bench.hpp"
#include "ccsinv/diagnostics.hpp"
#include "ccsinv/service.hpp"

using namespace ccsinv;
using nlohmann::json;

namespace {

std::string add_text() { return std::string(find_example("add")->text); }

json body_of(const ApiResponse& r) { return json::parse(r.body); }

}  // namespace

TEST_SUITE("service") {

TEST_CASE("invert request")
{
    json req{{"ccs_text", add_text()}, {"function", "add"}, {"I", {1}}, {"O", {1}}, {"inverter", "partial"}};
    auto r = handle_invert(req.dump());
    CHECK(r.status == 200);
    json j = body_of(r);
    CHECK(j["ok"] == true);
    const std::string text = j["inverted_ccs_text"];
    CHECK(text.find("add{1}{1}(0,y) -> <y>") != std::string::npos);
    CHECK(text.find("add{1}{1}(s(x),s(z)) -> <y> <= add{1}{1}(x,z) -> <y>") != std::string::npos);
    CHECK(j["diagnostics_table"]["columns"] == json{"ORIG", "PART"});
    CHECK(j["diagnostics_table"]["rows"].size() == property_names().size());
    for (const auto& row : j["diagnostics_table"]["rows"])
        if (row["property"] == "functional")
            CHECK(row["values"] == json{"yes", "yes"});
}

TEST_CASE("invert failures are reported, not thrown")
{
    json bad_text{{"ccs_text", "(VAR x) (RULES f(x) -> <x>"}, {"function", "f"}, {"I", json::array()},
                  {"O", {1}}, {"inverter", "full"}};
    auto r = handle_invert(bad_text.dump());
    CHECK(r.status == 400);
    json j = body_of(r);
    CHECK(j["ok"] == false);
    CHECK(j.contains("line"));
    CHECK(j.contains("column"));
    CHECK_FALSE(j.contains("inverted_ccs_text"));

    CHECK(handle_invert("not json").status == 400);
    CHECK(handle_invert(R"({"ccs_text": 3})").status == 400);
    json neg{{"ccs_text", add_text()}, {"function", "add"}, {"I", {-1}}, {"O", {1}}, {"inverter", "partial"}};
    CHECK(handle_invert(neg.dump()).status == 400);
    json inadmissible{{"ccs_text", add_text()}, {"function", "add"}, {"I", {1}}, {"O", {1}}, {"inverter", "full"}};
    auto ri = handle_invert(inadmissible.dump());
    CHECK(ri.status == 400);
    CHECK(std::string(body_of(ri)["error"]).find("does not admit") != std::string::npos);
    json deadlock{{"ccs_text", "(VAR x z) (RULES f(x) -> <x> <= g(x) -> <z>\n g(x) -> <x>)"},
                  {"function", "f"}, {"I", json::array()}, {"O", {1}}, {"inverter", "partial"}};
    CHECK(handle_invert(deadlock.dump()).status == 400);
}

TEST_CASE("eval request")
{
    json req{{"ccs_text", std::string(find_example("ack")->text)}, {"query_text", "ack(s(0),s(s(0)))"}};
    json j = body_of(handle_eval(req.dump()));
    CHECK(j["ok"] == true);
    CHECK(j["results"] == json{"<s(s(s(s(0))))>"});
    CHECK(j["exhausted"] == false);
    CHECK(j["function_calls"].get<int>() > 0);

    json empty{{"ccs_text", "(VAR) (RULES)"}, {"query_text", "f(0)"}};
    auto r = handle_eval(empty.dump());
    CHECK(r.status == 400);
    CHECK(std::string(body_of(r)["error"]).find("unknown symbol") != std::string::npos);

    json loop{{"ccs_text", support::kAckFull}, {"query_text", "ack{}{1}(s(0))"}, {"budget", 1000000}};
    json jl = body_of(handle_eval(loop.dump(), 5000));
    CHECK(jl["exhausted"] == true);
    CHECK(jl["function_calls"] == 5000);

    json first{{"ccs_text", support::kAckFull}, {"query_text", "ack{}{1}(s(s(0)))"}, {"mode", "first"}};
    json jf = body_of(handle_eval(first.dump(), 5000));
    CHECK(jf["results"] == json{"<0,s(0)>"});

    json bad_mode{{"ccs_text", add_text()}, {"query_text", "add(0,0)"}, {"mode", "some"}};
    CHECK(handle_eval(bad_mode.dump()).status == 400);
    json bad_query{{"ccs_text", add_text()}, {"query_text", "add(0"}};
    CHECK(handle_eval(bad_query.dump()).status == 400);
}

TEST_CASE("diagnose, parse and latex requests")
{
    json req{{"ccs_text", add_text()}};
    json d = body_of(handle_diagnose(req.dump()));
    CHECK(d["report"]["functional"] == "yes");
    CHECK(d["report"]["reversible"] == "no");
    CHECK(d["report"]["witnesses"].contains("reversible"));
    CHECK(d["diagnostics_table"]["columns"] == json{"ORIG"});
    CHECK(d["symbols"][0]["name"] == "add");

    json p = body_of(handle_parse(req.dump()));
    CHECK(p["symbols"][0]["arity_in"] == 2);
    CHECK(p["symbols"][0]["arity_out"] == 1);
    auto bad = handle_parse(json{{"ccs_text", "(VAR x) (RULES x(0) -> <0>)"}}.dump());
    CHECK(bad.status == 400);
    CHECK_FALSE(body_of(bad)["diagnostics"].empty());

    json l = body_of(handle_latex(req.dump()));
    CHECK(std::string(l["latex"]).rfind("\\begin{align*}", 0) == 0);
}

TEST_CASE("examples")
{
    json names = body_of(handle_examples())["examples"];
    for (const char* n : {"rem", "add", "ack"})
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
    auto e = handle_example("rem");
    CHECK(e.status == 200);
    CHECK(e.content_type.rfind("text/plain", 0) == 0);
    CHECK(e.body.find("rem(:(x,xs),0) -> <x,xs>") != std::string::npos);
    CHECK(handle_example("nope").status == 404);
}

TEST_CASE("identical requests give identical responses")
{
    json req{{"ccs_text", std::string(find_example("ack")->text)}, {"function", "ack"}, {"I", {2}}, {"O", {1}},
             {"inverter", "partial"}};
    CHECK(handle_invert(req.dump()).body == handle_invert(req.dump()).body);
}

TEST_CASE("column labels")
{
    CHECK(column_label("partial") == "PART");
    CHECK(column_label("full") == "FULL");
    CHECK(column_label("reverse-trivial") == "REVERSE-TRIVIAL");
}

TEST_CASE("benchmark harness")
{
    auto rep = run_ack_bench({1});
    REQUIRE(rep.rows.size() == 7);
    const auto& last = rep.rows.back();
    CHECK(last.x == 1);
    CHECK(last.z == 8);
    CHECK(last.baseline_steps == 23);
    CHECK(last.baseline_calls == 27);
    CHECK(last.candidate_steps == 16);
    CHECK(last.candidate_calls == 27);
    CHECK(format_ratio(last.speedup_steps()) == "1.44");
    CHECK(format_ratio(last.speedup_calls()) == "1.00");
    CHECK(rep.to_text() == run_ack_bench({1}).to_text());
    json j = json::parse(rep.to_json());
    CHECK(j["rows"].size() == 14);
    CHECK(ack_bench_inputs().size() == 21);
}

TEST_CASE("HTTP server")
{
    Server server;
    const int port = server.bind_any_port();
    REQUIRE(port > 0);
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(60, 0);

    auto ex = cli.Get("/api/examples");
    REQUIRE(ex);
    CHECK(ex->status == 200);
    CHECK(ex->body == handle_examples().body);

    auto add = cli.Get("/api/examples/add");
    REQUIRE(add);
    CHECK(add->body == add_text());
    auto missing = cli.Get("/api/examples/zzz");
    REQUIRE(missing);
    CHECK(missing->status == 404);

    json req{{"ccs_text", add_text()}, {"function", "add"}, {"I", {1}}, {"O", {1}}, {"inverter", "partial"}};
    auto inv = cli.Post("/api/invert", req.dump(), "application/json");
    REQUIRE(inv);
    CHECK(inv->status == 200);
    CHECK(inv->body == handle_invert(req.dump()).body);

    auto root = cli.Get("/");
    REQUIRE(root);
    CHECK(root->status == 200);

    // a long evaluation must not hold up other requests
    std::atomic<bool> slow_done{false};
    std::thread slow([&] {
        httplib::Client c2("127.0.0.1", port);
        c2.set_read_timeout(120, 0);
        json loop{{"ccs_text", support::kAckFull}, {"query_text", "ack{}{1}(s(0))"}};
        auto r = c2.Post("/api/eval", loop.dump(), "application/json");
        CHECK(r);
        if (r)
            CHECK(json::parse(r->body)["exhausted"] == true);
        slow_done = true;
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    const auto t0 = std::chrono::steady_clock::now();
    auto quick = cli.Get("/api/examples/rem");
    const auto quick_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    REQUIRE(quick);
    CHECK(quick->status == 200);
    CHECK(quick_ms < 1000);
    slow.join();
    CHECK(slow_done);

    server.stop();
    th.join();
}

}
